/* tslint:disable */
/* eslint-disable */

/**
 * Returns-to-origin ensemble on horizons `2^6..2^max_pow`, grown in
 * batches so the page stays responsive.
 */
export class ReturnsEnsemble {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Add `count` more replicas.
     */
    add(count: number): void;
    constructor(max_pow: number, seed: bigint);
    replicas(): number;
    /**
     * Rows `[t, sqrt(log t), mean, ci_lo, ci_hi]`, flattened. Empty until
     * two replicas have run.
     */
    table(): Float64Array;
}

/**
 * A single half-space walk that the page advances in slices.
 */
export class WalkView {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Run `steps` more steps.
     */
    advance(steps: number): void;
    /**
     * `[t, V(t;0), F, N, DF, z, x, y]`.
     */
    counters(): Float64Array;
    /**
     * Column heights on the square `|x|, |y| <= radius`, row by row from
     * `y = -radius`. A visited floor point with an empty column reports
     * 0.5 so the page can tell it from an untouched one.
     */
    heights(radius: number): Float64Array;
    constructor(seed: bigint);
    /**
     * True when the walker stands on a vertex it has not visited before.
     */
    on_new_vertex(): boolean;
}

/**
 * Hitting probabilities `r_1..r_n` of the chain on `{1..n}` with constant
 * up-probability `q`. Empty on invalid input.
 */
export function bd_curve(n: number, q: number): Float64Array;

/**
 * Upper envelope `r_j <= (1 + c)^(j - n)` implied by the growth ratio with
 * `c = (1 - 2q) / (1 - q)`, for `q < 1/2`.
 */
export function bd_growth_envelope(n: number, q: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_returnsensemble_free: (a: number, b: number) => void;
    readonly __wbg_walkview_free: (a: number, b: number) => void;
    readonly bd_curve: (a: number, b: number) => [number, number];
    readonly bd_growth_envelope: (a: number, b: number) => [number, number];
    readonly returnsensemble_add: (a: number, b: number) => void;
    readonly returnsensemble_new: (a: number, b: bigint) => number;
    readonly returnsensemble_replicas: (a: number) => number;
    readonly returnsensemble_table: (a: number) => [number, number];
    readonly walkview_advance: (a: number, b: number) => void;
    readonly walkview_counters: (a: number) => [number, number];
    readonly walkview_heights: (a: number, b: number) => [number, number];
    readonly walkview_new: (a: bigint) => number;
    readonly walkview_on_new_vertex: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
