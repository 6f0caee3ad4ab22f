#ifndef AFFORDANCE_H
#define AFFORDANCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AffStatus {
  AFF_STATUS_OK = 0,
  AFF_STATUS_NULL_ARGUMENT = 1,
  AFF_STATUS_INVALID_UTF8 = 2,
  AFF_STATUS_INVALID_JSON = 3,
  AFF_STATUS_INVALID_INPUT = 4,
  AFF_STATUS_INVALID_TD = 5,
  AFF_STATUS_CONFIG = 6,
  AFF_STATUS_NETWORK = 7,
  AFF_STATUS_NOT_FOUND = 8,
  AFF_STATUS_SCHEMA_MISMATCH = 9,
  AFF_STATUS_UNSUPPORTED = 10,
  AFF_STATUS_IO = 11,
  AFF_STATUS_CORRUPT_FILE = 12,
  AFF_STATUS_SCHEMA_VERSION = 13,
  AFF_STATUS_PANIC = 14,
} AffStatus;

// Opaque handle to a cognitive map.
typedef struct AffMap AffMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *aff_version(void);

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *aff_last_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void aff_string_free(char *s);

// Transduces `html_len` bytes of HTML into a page affordance model.
// `source_url` and `settings_json` may be NULL.
//
// # Safety
// `html` must point to `html_len` readable bytes; string arguments must be
// NUL-terminated; `out_json` must be writable.
enum AffStatus aff_transduce(const uint8_t *html,
                             size_t html_len,
                             const char *source_url,
                             const char *task,
                             const char *settings_json,
                             char **out_json);

// Parses a Thing Description into `{"catalog": ..., "warnings": [...]}`.
//
// # Safety
// `td` must be NUL-terminated; `out_json` must be writable.
enum AffStatus aff_parse_td(const char *td, bool strict, char **out_json);

// Every violation in a Thing Description, as a JSON array.
//
// # Safety
// `td` must be NUL-terminated; `out_json` must be writable.
enum AffStatus aff_validate_td(const char *td, bool strict, char **out_json);

// A new, empty map. Free with [`aff_map_free`].
struct AffMap *aff_map_new(void);

// # Safety
// `map` must come from this library and not have been freed. NULL is
// ignored.
void aff_map_free(struct AffMap *map);

// Loads a map file into a new handle.
//
// # Safety
// `path` must be NUL-terminated; `out_map` must be writable.
enum AffStatus aff_map_load(const char *path, struct AffMap **out_map);

// # Safety
// `map` must be a live handle; `path` must be NUL-terminated.
enum AffStatus aff_map_persist(const struct AffMap *map, const char *path);

// The map's version; 0 for NULL.
//
// # Safety
// `map` must be a live handle or NULL.
uint64_t aff_map_version(const struct AffMap *map);

// Upserts a page affordance model given as JSON. `out_revision` may be NULL.
//
// # Safety
// `map` must be a live handle; `pam_json` must be NUL-terminated.
enum AffStatus aff_map_upsert_pam(struct AffMap *map, const char *pam_json, uint64_t *out_revision);

// Upserts an affordance catalog given as JSON, in the form `aff_parse_td`
// returns under `"catalog"`. `out_revision` may be NULL.
//
// # Safety
// `map` must be a live handle; `catalog_json` must be NUL-terminated.
enum AffStatus aff_map_upsert_catalog(struct AffMap *map,
                                      const char *catalog_json,
                                      uint64_t *out_revision);

// Runs a query such as `{"text": "temp", "kind": "action"}` and returns the
// hits as a JSON array.
//
// # Safety
// `map` must be a live handle; `query_json` must be NUL-terminated;
// `out_json` must be writable.
enum AffStatus aff_map_query(const struct AffMap *map, const char *query_json, char **out_json);

// The map in its file format.
//
// # Safety
// `map` must be a live handle; `out_json` must be writable.
enum AffStatus aff_map_to_json(const struct AffMap *map, char **out_json);

// Reads a property of a Thing in the map over its protocol binding.
//
// # Safety
// `map` must be a live handle; strings must be NUL-terminated; `out_json`
// must be writable.
enum AffStatus aff_read_property(const struct AffMap *map,
                                 const char *thing,
                                 const char *property,
                                 char **out_json);

// # Safety
// As [`aff_read_property`]; `value_json` must be NUL-terminated.
enum AffStatus aff_write_property(const struct AffMap *map,
                                  const char *thing,
                                  const char *property,
                                  const char *value_json,
                                  char **out_json);

// Invokes an action. `input_json` may be NULL for actions without input.
//
// # Safety
// As [`aff_read_property`]; `input_json` must be NUL-terminated or NULL.
enum AffStatus aff_invoke_action(const struct AffMap *map,
                                 const char *thing,
                                 const char *action,
                                 const char *input_json,
                                 char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFFORDANCE_H */
