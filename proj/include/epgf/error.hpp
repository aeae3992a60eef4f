#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epgf {

// Error families map to CLI exit codes: usage=2, data=3, model/transport=4.
enum class ErrorFamily { Usage, Data, Model };

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, std::string msg)
        : std::runtime_error(std::move(msg)), family_(family) {}
    ErrorFamily family() const noexcept { return family_; }

private:
    ErrorFamily family_;
};

class InvalidResidueError : public Error {
public:
    InvalidResidueError(std::size_t position, char character)
        : Error(ErrorFamily::Data,
                "invalid residue '" + std::string(1, character) + "' at position " +
                    std::to_string(position)),
          position(position), character(character) {}
    std::size_t position;
    char character;
};

class EmptySequenceError : public Error {
public:
    EmptySequenceError() : Error(ErrorFamily::Data, "sequence has no residues") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::string msg) : Error(ErrorFamily::Usage, std::move(msg)) {}
};

class DataError : public Error {
public:
    explicit DataError(std::string msg) : Error(ErrorFamily::Data, std::move(msg)) {}
};

class ModelError : public Error {
public:
    explicit ModelError(std::string msg) : Error(ErrorFamily::Model, std::move(msg)) {}
};

}  // namespace epgf
