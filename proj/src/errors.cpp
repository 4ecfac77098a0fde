#include "qpkdv/errors.hpp"

namespace qpkdv {

void rethrow_with_context(const std::string& prefix) {
    try {
        throw;
    } catch (const ParseError&) {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(e.path(), prefix + ": " + std::string(e.what()).substr(e.path().size() + 2));
    } catch (const DimensionError& e) {
        throw DimensionError(prefix + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(prefix + ": " + e.what());
    } catch (const SmallDivisorError& e) {
        throw SmallDivisorError(prefix + ": " + e.what());
    } catch (const DiffeoError& e) {
        throw DiffeoError(prefix + ": " + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(prefix + ": " + e.what());
    } catch (const ContractionError& e) {
        throw ContractionError(prefix + ": " + e.what());
    } catch (const PreconditionError& e) {
        throw PreconditionError(prefix + ": " + e.what());
    } catch (const Error& e) {
        throw Error(prefix + ": " + e.what());
    }
}

}  // namespace qpkdv
