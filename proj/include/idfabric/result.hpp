/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_RESULT_HPP_
#define IDFABRIC_RESULT_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace idfabric {

enum class Errc {
    UndefinedTransition,
    InvalidEvent,
    MalformedLine,
    DuplicateInBatch,
    UnknownRole,
    UnknownResource,
    DuplicateRow,
    DuplicateIdentity,
    StoreUnavailable,
    UnknownIdentity,
    NotTerminated,
    ResourceDown,
    InsecureChannel,
    PrivilegeRequired,
    AttributeConflict,
    AccountNotFound,
    ResourceUnavailable,
    UnknownSerial,
    UnknownAttribute,
    AuthenticationFailure,
    PermissionDenied,
    UnknownGroup,
    MemberLacksAccount,
    LogUnavailable,
    EngineBusy,
    InvalidArgument,
    ParseError,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

struct Error {
    Errc        code;
    std::string message;

    std::string describe() const;
    bool        operator==(const Error&) const = default;
};

/// Thrown only where an error must cross a boundary that has no return
/// channel (CLI top level, snapshot loading). Library operations return Result.
class ErrorException : public std::runtime_error {
public:
    explicit ErrorException(Error error)
        : std::runtime_error(error.describe())
        , mError(std::move(error))
    {
    }

    const Error& error() const noexcept { return mError; }

private:
    Error mError;
};

/// Value-or-error return type.
template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value)
        : mData(std::in_place_index<0>, std::move(value))
    {
    }

    Result(Error error)
        : mData(std::in_place_index<1>, std::move(error))
    {
    }

    bool ok() const noexcept { return mData.index() == 0; }
    explicit operator bool() const noexcept { return ok(); }

    const T& value() const&
    {
        check();
        return std::get<0>(mData);
    }

    T& value() &
    {
        check();
        return std::get<0>(mData);
    }

    // By value, so `for (auto& x : f().value())` does not dangle.
    T value() &&
    {
        check();
        return std::get<0>(std::move(mData));
    }

    const T* operator->() const { return &value(); }
    const T& operator*() const& { return value(); }

    const Error& error() const { return std::get<1>(mData); }
    Errc         code() const { return error().code; }

private:
    void check() const
    {
        if (!ok()) {
            throw ErrorException(std::get<1>(mData));
        }
    }

    std::variant<T, Error> mData;
};

template <>
class [[nodiscard]] Result<void> {
public:
    Result() = default;
    Result(Error error)
        : mError(std::move(error))
        , mFailed(true)
    {
    }

    bool ok() const noexcept { return !mFailed; }
    explicit operator bool() const noexcept { return ok(); }

    const Error& error() const { return mError; }
    Errc         code() const { return mError.code; }

private:
    Error mError {Errc::InvalidArgument, {}};
    bool  mFailed = false;
};

using Status = Result<void>;

inline Error make_error(Errc code, std::string message = {})
{
    return Error {code, std::move(message)};
}

} // namespace idfabric

#endif
