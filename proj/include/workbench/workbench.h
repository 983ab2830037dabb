#ifndef WORKBENCH_WORKBENCH_H
#define WORKBENCH_WORKBENCH_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(WB_BUILDING_LIBRARY)
#define WB_API __attribute__((visibility("default")))
#else
#define WB_API
#endif

typedef struct wb_store wb_store;
typedef struct wb_server wb_server;

typedef enum wb_status {
  WB_OK = 0,
  WB_MALFORMED_JSON,
  WB_SCHEMA_VIOLATION,
  WB_IDENTIFIER_MISMATCH,
  WB_CARDINALITY_ERROR,
  WB_SECTION_MISMATCH,
  WB_UNKNOWN_LABEL,
  WB_EMPTY_CONTEXT,
  WB_MISSING_ATTACHMENT,
  WB_TEMPLATE_CORRUPTION,
  WB_PROVIDER_ERROR,
  WB_REPLAY_MISS,
  WB_AUTH_MISSING,
  WB_PLAN_INCOMPLETE,
  WB_SAMPLE_TOO_LARGE,
  WB_UNKNOWN_HYPOTHESIS,
  WB_UNKNOWN_CODE,
  WB_NON_BINARY_CELL,
  WB_DUPLICATE_ROW,
  WB_COUNT_EXCEEDS_ROWS,
  WB_RANK_DEFICIENT,
  WB_DIMENSION_MISMATCH,
  WB_INVALID_P,
  WB_ROW_MISMATCH,
  WB_NO_MATRIX,
  WB_UNKNOWN_FAMILY,
  WB_PORT_BUSY,
  WB_STORE_LOCKED,
  WB_RUN_REFERENCED,
  WB_DUPLICATE_NAME,
  WB_INVALID_ARGUMENT,
  WB_IO,
  WB_INTERNAL
} wb_status;

/* Name of a status, e.g. "NonBinaryCell". */
WB_API const char* wb_status_name(wb_status status);
/* Message of the last failed call on this thread ("" after success). */
WB_API const char* wb_last_error(void);
/* Releases any string returned through a char** out parameter. */
WB_API void wb_string_free(char* text);
WB_API const char* wb_version(void);

WB_API wb_status wb_store_open(const char* directory, wb_store** out);
WB_API void wb_store_close(wb_store* store);
WB_API wb_status wb_store_digest(wb_store* store, char** out_hex);

/*
 * Options are JSON objects; every key is optional unless noted.
 *   plan          path to plan.cfg (defaults built in)
 *   mode          "live" | "record" | "replay" (overrides the plan)
 *   transcripts   replay directory (default <store>/transcripts)
 *   parallelism   in-flight provider calls (default 4)
 */

/* Stage one. Extra keys: context (path, required), n. Returns a summary. */
WB_API wb_status wb_stage_one(wb_store* store, const char* options_json, char** out_json);
/* Seed sampling. Keys: k, seed. Returns the chosen record ids. */
WB_API wb_status wb_sample(wb_store* store, const char* options_json, char** out_json);
/* Stage two over the stored seeds. Extra key: attachments (dir, required). */
WB_API wb_status wb_stage_two(wb_store* store, const char* options_json, char** out_json);

/* CSV: hypothesis_id,<code>,... with 0/1 cells. Returns matrix metadata. */
WB_API wb_status wb_import_codes(wb_store* store, const char* csv_text, char** out_json);
/* Count table (code,<six setting labels>) to a code-matrix CSV laid out over
 * the stored hypothesis units. */
WB_API wb_status wb_synthesize_codes(wb_store* store, const char* counts_csv, char** out_csv);

/* Analysis. Keys: correction ("CR0"|"CR1"), reference ("normal"|"t"),
 * alpha, markers (bool), output ("json"|"effects"|"omnibus"), raw (bool). */
WB_API wb_status wb_analyze(wb_store* store, const char* options_json, char** out_text);
/* Dot-and-whisker rows. Keys: family ("4step"|"toward"|"away", required),
 * subject ("codes"|"markers"), format ("csv"|"json"), raw, plus analysis keys. */
WB_API wb_status wb_report(wb_store* store, const char* options_json, char** out_text);
/* which: "table1" | "table3" | "matrix" */
WB_API wb_status wb_export(wb_store* store, const char* which, char** out_csv);
/* Keys: code (required). */
WB_API wb_status wb_cell_counts(wb_store* store, const char* options_json, char** out_json);

/* Hedge counts over the stored stage-one expectation notes. */
WB_API wb_status wb_hedge_counts(wb_store* store, char** out_json);
/* Co-occurrence of codes with a term. Keys: term (default "reiter"). */
WB_API wb_status wb_reiter(wb_store* store, const char* options_json, char** out_json);
/* Token and cost totals. Keys: transcripts, input_price_per_1m, output_price_per_1m, plan. */
WB_API wb_status wb_cost(wb_store* store, const char* options_json, char** out_json);

/* HTTP API. Keys: host, port (0 = any), correction, alpha, static_dir.
 * The server takes the store lock for its lifetime. */
WB_API wb_status wb_server_start(const char* store_directory, const char* options_json, wb_server** out);
WB_API int wb_server_port(const wb_server* server);
WB_API void wb_server_stop(wb_server* server);

#ifdef __cplusplus
}
#endif

#endif
