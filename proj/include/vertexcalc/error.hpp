#pragma once

#include <stdexcept>
#include <string>

namespace vertexcalc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UntrackedExponent : public Error {
 public:
  explicit UntrackedExponent(const std::string& what = "untracked exponent") : Error(what) {}
};

class RegionError : public Error {
 public:
  using Error::Error;
};

class PoleError : public Error {
 public:
  explicit PoleError(const std::string& what = "pole") : Error(what) {}
};

class FitUnreliable : public Error {
 public:
  FitUnreliable(const std::string& what, double condition) : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class NotExpandable : public Error {
 public:
  explicit NotExpandable(const std::string& what = "not expandable over lattice") : Error(what) {}
};

class InsufficientTruncation : public Error {
 public:
  explicit InsufficientTruncation(const std::string& what = "insufficient truncation") : Error(what) {}
};

}  // namespace vertexcalc
