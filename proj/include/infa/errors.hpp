#ifndef INFA_ERRORS_HPP
#define INFA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace infa {

// Error categories map one-to-one onto CLI exit codes (see tools/infa_main.cpp):
// config_error -> 2, data_error -> 3, compute_error -> 4.

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class compute_error : public std::runtime_error {
public:
    explicit compute_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace infa

#endif
