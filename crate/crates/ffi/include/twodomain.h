#ifndef TWODOMAIN_H
#define TWODOMAIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every fallible function.
typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  TD_STATUS_INVALID_ARGUMENT = 2,
  TD_STATUS_CONFIG = 3,
  TD_STATUS_IO = 4,
  // The solver or interface control construction failed.
  TD_STATUS_NUMERICAL = 5,
  TD_STATUS_BUDGET_EXCEEDED = 6,
  TD_STATUS_BUFFER_TOO_SMALL = 7,
  TD_STATUS_PANIC = 8,
} TdStatus;

typedef enum TdVariant {
  // All tangent mixtures on the interface.
  TD_VARIANT_MINUS = 0,
  // Regular tangent mixtures only.
  TD_VARIANT_PLUS = 1,
  // Side-1 data everywhere.
  TD_VARIANT_SINGLE_DOMAIN = 2,
} TdVariant;

// A loaded problem together with the grid from its configuration.
typedef struct TdProblem TdProblem;

// A solved value field on a space-time grid.
typedef struct TdValueField TdValueField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating to `len` bytes. Returns the size
// needed to hold the whole message including the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t td_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *td_version(void);

// Parses a TOML problem document.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum TdStatus td_problem_from_toml(const char *toml, struct TdProblem **out);

// Reads and parses a TOML problem file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum TdStatus td_problem_from_file(const char *path, struct TdProblem **out);

// # Safety
// `problem` must be null or a handle from `td_problem_from_*` not yet freed.
void td_problem_free(struct TdProblem *problem);

// Writes the state dimension and the horizon.
//
// # Safety
// `problem` must be a live handle; outputs may be null.
enum TdStatus td_problem_info(const struct TdProblem *problem, size_t *dim, double *horizon);

// Side Hamiltonian `H_i(x, t, p)` for `side` 1 or 2. `x` and `p` have
// `dim` entries.
//
// # Safety
// Pointers must reference `dim` readable values; `out` must be writable.
enum TdStatus td_hamiltonian_side(const struct TdProblem *problem,
                                  int side,
                                  const double *x,
                                  double t,
                                  const double *p,
                                  size_t dim,
                                  double *out);

// Tangential Hamiltonian at an interface point `z` (`dim` entries, last
// one zero) with tangential momentum `p_tan` (`dim - 1` entries). A
// nonzero `regular_only` restricts to regular interface controls.
//
// # Safety
// Pointers must reference the stated number of readable values.
enum TdStatus td_hamiltonian_tangential(const struct TdProblem *problem,
                                        const double *z,
                                        size_t dim,
                                        double s,
                                        const double *p_tan,
                                        int regular_only,
                                        double *out);

// Solves on the grid given in the problem's configuration.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum TdStatus td_solve(const struct TdProblem *problem,
                       enum TdVariant variant,
                       struct TdValueField **out);

// Solves on a grid with spacing `dx` over the problem domain and the
// default time step.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum TdStatus td_solve_with_spacing(const struct TdProblem *problem,
                                    enum TdVariant variant,
                                    double dx,
                                    struct TdValueField **out);

// # Safety
// `field` must be null or a handle from `td_solve*` not yet freed.
void td_field_free(struct TdValueField *field);

// Interpolated value at `(x, t)`; `x` has `dim` entries. Points outside
// the grid are clamped to it.
//
// # Safety
// `field` must be a live handle, `x` readable for `dim` values.
enum TdStatus td_field_value(const struct TdValueField *field,
                             const double *x,
                             size_t dim,
                             double t,
                             double *out);

// Writes the number of spatial nodes, time steps and the time step.
//
// # Safety
// `field` must be a live handle; outputs may be null.
enum TdStatus td_field_shape(const struct TdValueField *field,
                             size_t *nodes,
                             size_t *steps,
                             double *dt);

// Copies time layer `n` (first axis varying fastest, as in
// the CSV output) into `buf`, which must hold `len >= nodes` values.
//
// # Safety
// `field` must be a live handle and `buf` writable for `len` values.
enum TdStatus td_field_layer(const struct TdValueField *field, size_t n, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWODOMAIN_H */
