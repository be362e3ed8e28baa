#pragma once

#include <stdexcept>
#include <string>

namespace dpg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Nonpositive pivot during a Cholesky factorization.
class NotSpd : public Error {
 public:
  NotSpd(const std::string& what, long pivot = -1)
      : Error(what), pivot_(pivot) {}
  long pivot() const { return pivot_; }

 private:
  long pivot_;
};

class Singular : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, int iterations)
      : Error(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonConformingMesh : public Error {
 public:
  using Error::Error;
};

class UnsupportedDegree : public Error {
 public:
  using Error::Error;
};

class MissingElementData : public Error {
 public:
  using Error::Error;
};

/// Polynomial degree below what a formulation needs (e.g. p = 0 without IBP).
class DegreeTooLow : public Error {
 public:
  using Error::Error;
};

/// Test degree too small relative to the trial degree.
class DegreeViolation : public Error {
 public:
  using Error::Error;
};

class ZeroElements : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidId : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class EmptyMesh : public Error {
 public:
  using Error::Error;
};

}  // namespace dpg
