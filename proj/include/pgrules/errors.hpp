#pragma once

#include <stdexcept>
#include <string>

namespace pgrules {

// Base for everything thrown by this library. The CLI maps the three
// sub-families to distinct exit codes (schema 2, config 3, client 4);
// anything else exits 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- document / schema problems (exit code 2) ----

class SchemaError : public Error {
public:
    using Error::Error;
};

class WeightOutOfRange : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class UnknownClass : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class ConflictingRelation : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class NegativeCount : public SchemaError {
public:
    using SchemaError::SchemaError;
};

// ---- configuration problems (exit code 3) ----

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---- knowledge-client problems (exit code 4) ----

class ClientError : public Error {
public:
    using Error::Error;
};

class NetworkError : public ClientError {
public:
    using ClientError::ClientError;
};

class AuthError : public ClientError {
public:
    using ClientError::ClientError;
};

class ValidationError : public ClientError {
public:
    using ClientError::ClientError;
};

// ---- domain errors ----

class ZeroAreaBox : public Error {
public:
    using Error::Error;
};

class EmptySceneMap : public Error {
public:
    using Error::Error;
};

class MissingLogits : public Error {
public:
    using Error::Error;
};

class NoEvidence : public Error {
public:
    using Error::Error;
};

class DegenerateEvidence : public Error {
public:
    using Error::Error;
};

class ProvenanceMismatch : public Error {
public:
    using Error::Error;
};

class InvalidCounts : public Error {
public:
    using Error::Error;
};

} // namespace pgrules
