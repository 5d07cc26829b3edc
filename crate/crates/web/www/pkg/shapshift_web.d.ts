/* tslint:disable */
/* eslint-disable */

/**
 * Error band and per-row labels: 0 correct, 1 over-predicted, 2 under-predicted.
 */
export class Partition {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    count(label: number): number;
    readonly high: number;
    readonly labels: Uint8Array;
    readonly low: number;
    readonly q_high_value: number;
    readonly q_low_value: number;
    readonly translation: string;
}

/**
 * Both coefficients sampled at evenly spaced indices of a full-length run.
 */
export class Schedule {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly index: Float64Array;
    readonly lambda1: Float64Array;
    readonly lambda2: Float64Array;
}

export class Selection {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly best_mae: number;
    readonly selected: string[];
    readonly trace_csv: string;
}

export function lambda_schedule(kind: string, _case: number, points: number): Schedule;

export function partition_errors(errors: Float64Array, q_low: number, q_high: number): Partition;

/**
 * Runs the selector on a 3000-step version of a scenario (inputs plus the
 * target lag, 2000 training and 500 validation rows, 60-tree models) so it
 * finishes in a few seconds in the browser.
 */
export function small_selection(kind: string, _case: number, shift: boolean, q_low: number, q_high: number, shadow_fits: number, seed: number): Selection;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_partition_free: (a: number, b: number) => void;
    readonly __wbg_schedule_free: (a: number, b: number) => void;
    readonly __wbg_selection_free: (a: number, b: number) => void;
    readonly lambda_schedule: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly partition_count: (a: number, b: number) => number;
    readonly partition_errors: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly partition_high: (a: number) => number;
    readonly partition_labels: (a: number) => [number, number];
    readonly partition_low: (a: number) => number;
    readonly partition_q_high_value: (a: number) => number;
    readonly partition_q_low_value: (a: number) => number;
    readonly partition_translation: (a: number) => [number, number];
    readonly schedule_index: (a: number) => [number, number];
    readonly schedule_lambda1: (a: number) => [number, number];
    readonly schedule_lambda2: (a: number) => [number, number];
    readonly selection_best_mae: (a: number) => number;
    readonly selection_selected: (a: number) => [number, number];
    readonly selection_trace_csv: (a: number) => [number, number];
    readonly small_selection: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
