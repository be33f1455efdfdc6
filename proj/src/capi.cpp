#include "fkdyn/fkdyn.h"

#include <cstring>
#include <map>
#include <string>

#include "commands.hpp"
#include "fkdyn/boundary.hpp"
#include "fkdyn/error.hpp"
#include "fkdyn/exact.hpp"
#include "fkdyn/lattice.hpp"
#include "fkdyn/state.hpp"

#ifndef FKDYN_VERSION
#define FKDYN_VERSION "unknown"
#endif

struct fkdyn_request {
  std::string command;
  std::map<std::string, std::string> values;
};

struct fkdyn_result {
  fkdyn::cmd::RunResult r;
};

struct fkdyn_bc {
  fkdyn::BoundaryCondition bc;
};

namespace {

thread_local std::string g_last_error;

fkdyn_status to_status(fkdyn::ErrorCode c) {
  switch (c) {
    case fkdyn::ErrorCode::invalid_argument: return FKDYN_E_INVALID_ARGUMENT;
    case fkdyn::ErrorCode::precondition: return FKDYN_E_PRECONDITION;
    case fkdyn::ErrorCode::size_cap: return FKDYN_E_SIZE_CAP;
    case fkdyn::ErrorCode::not_realizable: return FKDYN_E_NOT_REALIZABLE;
    case fkdyn::ErrorCode::epoch_cap: return FKDYN_E_EPOCH_CAP;
    case fkdyn::ErrorCode::inconclusive: return FKDYN_E_INCONCLUSIVE;
    case fkdyn::ErrorCode::internal: return FKDYN_E_INTERNAL;
  }
  return FKDYN_E_INTERNAL;
}

template <class F>
fkdyn_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const fkdyn::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FKDYN_E_SIZE_CAP;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FKDYN_E_INTERNAL;
  }
}

fkdyn_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return FKDYN_E_INVALID_ARGUMENT;
}

// Built once; the returned pointers stay valid for the process lifetime.
const std::map<std::string, std::string>& params_json() {
  static const std::map<std::string, std::string> table = [] {
    std::map<std::string, std::string> t;
    for (const auto& c : fkdyn::cmd::commands()) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& p : c.params) arr.push_back({{"name", p.name}, {"default", p.def}, {"help", p.help}});
      t[c.name] = arr.dump();
    }
    return t;
  }();
  return table;
}

}  // namespace

extern "C" {

const char* fkdyn_last_error(void) { return g_last_error.c_str(); }

const char* fkdyn_version(void) { return FKDYN_VERSION; }

const char* fkdyn_status_name(fkdyn_status s) {
  switch (s) {
    case FKDYN_OK: return "ok";
    case FKDYN_E_INVALID_ARGUMENT: return "invalid argument";
    case FKDYN_E_PRECONDITION: return "precondition failed";
    case FKDYN_E_SIZE_CAP: return "size cap exceeded";
    case FKDYN_E_NOT_REALIZABLE: return "boundary condition not realizable";
    case FKDYN_E_EPOCH_CAP: return "epoch cap reached";
    case FKDYN_E_INCONCLUSIVE: return "inconclusive";
    case FKDYN_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

size_t fkdyn_command_count(void) { return fkdyn::cmd::commands().size(); }

const char* fkdyn_command_name(size_t i) {
  const auto& c = fkdyn::cmd::commands();
  return i < c.size() ? c[i].name.c_str() : nullptr;
}

const char* fkdyn_command_help(const char* command) {
  if (!command) return nullptr;
  const auto* c = fkdyn::cmd::find_command(command);
  return c ? c->help.c_str() : nullptr;
}

const char* fkdyn_command_params(const char* command) {
  if (!command) return nullptr;
  const auto& t = params_json();
  auto it = t.find(command);
  return it == t.end() ? nullptr : it->second.c_str();
}

fkdyn_status fkdyn_request_new(const char* command, fkdyn_request** out) {
  if (!command) return null_arg("command");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    fkdyn::require(fkdyn::cmd::find_command(command) != nullptr, fkdyn::ErrorCode::invalid_argument,
                   std::string("unknown command '") + command + "'");
    *out = new fkdyn_request{command, {}};
    return FKDYN_OK;
  });
}

fkdyn_status fkdyn_request_set(fkdyn_request* req, const char* name, const char* value) {
  if (!req) return null_arg("request");
  if (!name || !value) return null_arg("name/value");
  return guarded([&] {
    req->values[name] = value;
    return FKDYN_OK;
  });
}

void fkdyn_request_free(fkdyn_request* req) { delete req; }

fkdyn_status fkdyn_run(const fkdyn_request* req, fkdyn_result** out) {
  if (!req) return null_arg("request");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto* res = new fkdyn_result{fkdyn::cmd::run_command(req->command, req->values)};
    *out = res;
    return res->r.inconclusive ? FKDYN_E_INCONCLUSIVE : FKDYN_OK;
  });
}

const char* fkdyn_result_csv(const fkdyn_result* res) { return res ? res->r.csv.c_str() : nullptr; }
const char* fkdyn_result_json(const fkdyn_result* res) { return res ? res->r.json.c_str() : nullptr; }
const char* fkdyn_result_line(const fkdyn_result* res) { return res ? res->r.line.c_str() : nullptr; }
int fkdyn_result_inconclusive(const fkdyn_result* res) { return res && res->r.inconclusive ? 1 : 0; }
void fkdyn_result_free(fkdyn_result* res) { delete res; }

fkdyn_status fkdyn_bc_parse(const char* spec, int n, int l, fkdyn_bc** out) {
  if (!spec) return null_arg("spec");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    fkdyn::require(n >= 1 && l >= 1, fkdyn::ErrorCode::invalid_argument, "need n, l >= 1");
    const fkdyn::BoundaryCondition bc = fkdyn::cmd::parse_bc(spec, n, l);
    *out = new fkdyn_bc{bc};
    return FKDYN_OK;
  });
}

int fkdyn_bc_is_realizable(const fkdyn_bc* bc) { return bc && fkdyn::is_realizable(bc->bc) ? 1 : 0; }
int fkdyn_bc_num_blocks(const fkdyn_bc* bc) { return bc ? bc->bc.num_blocks() : -1; }
int fkdyn_bc_localization(const fkdyn_bc* bc) { return bc ? fkdyn::localization(bc->bc) : -1; }

fkdyn_status fkdyn_bc_to_json(const fkdyn_bc* bc, char** out) {
  if (!bc) return null_arg("bc");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const std::string s = fkdyn::bc_to_json(bc->bc);
    char* buf = new char[s.size() + 1];
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
    return FKDYN_OK;
  });
}

fkdyn_status fkdyn_bc_dual(const fkdyn_bc* bc, fkdyn_bc** out) {
  if (!bc) return null_arg("bc");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const auto lat = fkdyn::Lattice::build_rect(bc->bc.n(), bc->bc.l(), fkdyn::EdgeSetVariant::modified);
    *out = new fkdyn_bc{fkdyn::dual_bc(bc->bc, lat)};
    return FKDYN_OK;
  });
}

void fkdyn_bc_free(fkdyn_bc* bc) { delete bc; }
void fkdyn_string_free(char* s) { delete[] s; }

fkdyn_status fkdyn_exact_gap(int n, int l, const fkdyn_bc* bc, double p, double q, double* gap) {
  if (!gap) return null_arg("gap");
  return guarded([&] {
    const auto lat = fkdyn::Lattice::build_rect(n, l);
    const auto b = bc ? bc->bc : fkdyn::BoundaryCondition::free(lat);
    fkdyn::require(b.n() == n && b.l() == l, fkdyn::ErrorCode::invalid_argument, "bc dimensions do not match");
    fkdyn::Params prm{p, q};
    prm.validate();
    *gap = fkdyn::spectrum(fkdyn::fk_transition_matrix(lat, b, prm)).gap;
    return FKDYN_OK;
  });
}

}  // extern "C"
