/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_partition_free: (a: number, b: number) => void;
export const __wbg_schedule_free: (a: number, b: number) => void;
export const __wbg_selection_free: (a: number, b: number) => void;
export const lambda_schedule: (a: number, b: number, c: number, d: number) => [number, number, number];
export const partition_count: (a: number, b: number) => number;
export const partition_errors: (a: number, b: number, c: number, d: number) => [number, number, number];
export const partition_high: (a: number) => number;
export const partition_labels: (a: number) => [number, number];
export const partition_low: (a: number) => number;
export const partition_q_high_value: (a: number) => number;
export const partition_q_low_value: (a: number) => number;
export const partition_translation: (a: number) => [number, number];
export const schedule_index: (a: number) => [number, number];
export const schedule_lambda1: (a: number) => [number, number];
export const schedule_lambda2: (a: number) => [number, number];
export const selection_best_mae: (a: number) => number;
export const selection_selected: (a: number) => [number, number];
export const selection_trace_csv: (a: number) => [number, number];
export const small_selection: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
