// capi.cpp

#include "cylnls/cylnls.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "cylnls/commands.hpp"
#include "cylnls/diagnostics.hpp"
#include "cylnls/errors.hpp"
#include "cylnls/io.hpp"
#include "cylnls/run_config.hpp"

struct cylnls_config {
  nlohmann::json raw;
  cylnls::RunConfig cfg;
  std::string resolved;
};

struct cylnls_field {
  cylnls::SpectralField field;
};

struct cylnls_result {
  cylnls::CommandOutcome outcome;
  std::string summary;
};

namespace {

thread_local std::string last_error;

cylnls_status fail(cylnls_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
cylnls_status guarded(F&& f) {
  try {
    f();
    return CYLNLS_OK;
  } catch (const cylnls::ConfigError& e) {
    return fail(CYLNLS_ERR_CONFIG, e.what());
  } catch (const cylnls::NumericalError& e) {
    return fail(CYLNLS_ERR_NUMERICAL, e.what());
  } catch (const cylnls::ComplexityError& e) {
    return fail(CYLNLS_ERR_COMPLEXITY, e.what());
  } catch (const cylnls::IoError& e) {
    return fail(CYLNLS_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CYLNLS_ERR_INVALID, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CYLNLS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CYLNLS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CYLNLS_ERR_INTERNAL, "unknown error");
  }
}

cylnls_config* make_config(nlohmann::json raw) {
  auto* c = new cylnls_config{std::move(raw), {}, {}};
  try {
    c->cfg = cylnls::parse_run_config(c->raw);
    c->resolved = cylnls::resolve(c->cfg).dump(2);
  } catch (...) {
    delete c;
    throw;
  }
  return c;
}

}  // namespace

extern "C" {

const char* cylnls_version(void) { return cylnls::kVersion; }

const char* cylnls_last_error(void) { return last_error.c_str(); }

const char* cylnls_status_name(cylnls_status s) {
  switch (s) {
    case CYLNLS_OK: return "ok";
    case CYLNLS_ERR_CONFIG: return "config error";
    case CYLNLS_ERR_NUMERICAL: return "numerical failure";
    case CYLNLS_ERR_COMPLEXITY: return "complexity guard";
    case CYLNLS_ERR_IO: return "i/o error";
    case CYLNLS_ERR_INVALID: return "invalid argument";
    case CYLNLS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

cylnls_status cylnls_config_load(const char* path, cylnls_config** out) {
  if (!path || !out) return fail(CYLNLS_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::string text;
    try {
      text = cylnls::read_file(path);
    } catch (const cylnls::IoError& e) {
      // an unreadable config file is a config problem for the caller
      throw cylnls::ConfigError(e.what());
    }
    nlohmann::json raw;
    try {
      raw = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw cylnls::ConfigError(std::string("config: ") + path + ": " + e.what());
    }
    *out = make_config(std::move(raw));
  });
}

cylnls_status cylnls_config_parse(const char* json_text, cylnls_config** out) {
  if (!json_text || !out) return fail(CYLNLS_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json raw;
    try {
      raw = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw cylnls::ConfigError(std::string("config: ") + e.what());
    }
    *out = make_config(std::move(raw));
  });
}

const char* cylnls_config_resolved(const cylnls_config* c) { return c ? c->resolved.c_str() : ""; }

uint64_t cylnls_config_seed(const cylnls_config* c) { return c ? c->cfg.seed : 0; }

void cylnls_config_free(cylnls_config* c) { delete c; }

void cylnls_run_options_init(cylnls_run_options* o) {
  if (!o) return;
  o->out_dir = nullptr;
  o->has_seed = 0;
  o->seed = 0;
  o->jobs = 1;
  o->plots = -1;
}

size_t cylnls_command_count(void) { return cylnls::command_names().size(); }

const char* cylnls_command_name(size_t i) {
  const auto& n = cylnls::command_names();
  return i < n.size() ? n[i].c_str() : nullptr;
}

cylnls_status cylnls_run_command(const char* command, const cylnls_config* c, const cylnls_run_options* opt,
                                 cylnls_result** out) {
  if (!command || !c || !out) return fail(CYLNLS_ERR_INVALID, "null argument");
  *out = nullptr;
  cylnls_run_options o;
  cylnls_run_options_init(&o);
  if (opt) o = *opt;
  return guarded([&] {
    cylnls::CommandOptions co;
    if (o.out_dir) co.out_dir = o.out_dir;
    if (o.has_seed) co.seed = o.seed;
    co.jobs = o.jobs ? o.jobs : 1;
    if (o.plots >= 0) co.plots = o.plots != 0;
    auto* r = new cylnls_result{cylnls::run_command(command, c->raw, co), {}};
    r->summary = r->outcome.summary.dump(2);
    *out = r;
  });
}

const char* cylnls_result_out_dir(const cylnls_result* r) { return r ? r->outcome.out_dir.c_str() : ""; }

size_t cylnls_result_file_count(const cylnls_result* r) { return r ? r->outcome.files.size() : 0; }

const char* cylnls_result_file(const cylnls_result* r, size_t i) {
  return r && i < r->outcome.files.size() ? r->outcome.files[i].c_str() : nullptr;
}

size_t cylnls_result_warning_count(const cylnls_result* r) { return r ? r->outcome.warnings.size() : 0; }

const char* cylnls_result_warning(const cylnls_result* r, size_t i) {
  return r && i < r->outcome.warnings.size() ? r->outcome.warnings[i].c_str() : nullptr;
}

const char* cylnls_result_summary(const cylnls_result* r) { return r ? r->summary.c_str() : ""; }

void cylnls_result_free(cylnls_result* r) { delete r; }

cylnls_status cylnls_field_initial(const cylnls_config* c, cylnls_field** out) {
  if (!c || !out) return fail(CYLNLS_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new cylnls_field{cylnls::make_initial_data(c->cfg)}; });
}

cylnls_status cylnls_field_load(const char* path, cylnls_field** out, double* time) {
  if (!path || !out) return fail(CYLNLS_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    cylnls::Snapshot s = cylnls::load_snapshot(path);
    if (time) *time = s.time;
    *out = new cylnls_field{std::move(s.field)};
  });
}

cylnls_status cylnls_field_save(const cylnls_field* f, const char* path, double time) {
  if (!f || !path) return fail(CYLNLS_ERR_INVALID, "null argument");
  return guarded([&] { cylnls::save_snapshot(path, f->field, time); });
}

void cylnls_field_shape(const cylnls_field* f, double* lx, int* nx, int* ny) {
  if (!f) return;
  if (lx) *lx = f->field.grid().lx();
  if (nx) *nx = f->field.grid().nx();
  if (ny) *ny = f->field.grid().ny();
}

cylnls_status cylnls_field_coefficients(const cylnls_field* f, double* buf, size_t len) {
  if (!f || !buf) return fail(CYLNLS_ERR_INVALID, "null argument");
  const auto& d = f->field.data();
  if (len < 2 * d.size()) return fail(CYLNLS_ERR_INVALID, "buffer too small");
  std::memcpy(buf, d.data(), d.size() * sizeof(d[0]));
  return CYLNLS_OK;
}

double cylnls_field_mass(const cylnls_field* f) { return f ? cylnls::mass(f->field) : 0.0; }

double cylnls_field_energy(const cylnls_field* f) { return f ? cylnls::energy(f->field) : 0.0; }

void cylnls_field_free(cylnls_field* f) { delete f; }

}  // extern "C"
