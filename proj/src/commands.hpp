#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkdyn/boundary.hpp"

namespace fkdyn::cmd {

struct ParamSpec {
  std::string name;
  std::string def;
  std::string help;
};

class Args {
 public:
  Args(const std::vector<ParamSpec>& specs, const std::map<std::string, std::string>& given);

  const std::string& str(const std::string& name) const;
  int integer(const std::string& name) const;
  uint64_t u64(const std::string& name) const;
  double real(const std::string& name) const;
  bool flag(const std::string& name) const;
  std::vector<double> reals(const std::string& name) const;
  std::vector<int> integers(const std::string& name) const;
  bool given(const std::string& name) const { return given_.count(name) > 0; }
  // Effective values in declaration order.
  nlohmann::ordered_json record() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> given_;
};

struct Output {
  std::string csv;
  nlohmann::ordered_json summary;
  std::string line;
  bool inconclusive = false;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  std::function<Output(const Args&)> run;
};

// "free", "wired", inline JSON or a path to a JSON file.
BoundaryCondition parse_bc(const std::string& spec, int n, int l);

const std::vector<Command>& commands();
const Command* find_command(const std::string& name);

struct RunResult {
  std::string csv;
  std::string json;
  std::string line;
  bool inconclusive = false;
};

RunResult run_command(const std::string& name, const std::map<std::string, std::string>& values);

}  // namespace fkdyn::cmd
