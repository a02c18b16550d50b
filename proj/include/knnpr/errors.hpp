/*
 * Copyright (c) 2026, The knnpr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace knnpr {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad preconditions: dimension mismatch, out-of-range k, ragged CSV rows,
/// non-finite values, invalid strategy parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// File does not carry the expected magic or version.
class FormatError : public Error {
public:
    using Error::Error;
};

/// File header is readable but the payload is shorter than declared.
class CorruptionError : public Error {
public:
    using Error::Error;
};

/// The file system refused an open, read or write.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace knnpr
