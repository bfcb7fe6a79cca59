/* tslint:disable */
/* eslint-disable */

/**
 * A sampled rook-graph configuration with its components ranked by size.
 */
export class Percolation {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    components(): number;
    /**
     * Grid height (`L_1`, rows).
     */
    height(): number;
    isolated(): number;
    largest(): number;
    /**
     * Largest component over `λ a_1 a_2 n`.
     */
    normalized_largest(): number;
    occupied(): number;
    /**
     * Predicted giant fraction `1 - q` (0 at or below the critical point).
     */
    predicted_fraction(): number;
    /**
     * Row-major cell ranks: 0 empty, 1 largest component, 2 second, and so on.
     */
    ranks(): Uint32Array;
    second_largest(): number;
    /**
     * Grid width (`L_2`, columns).
     */
    width(): number;
}

/**
 * Critical λ for the given aspect ratios.
 */
export function critical_value(a: Float64Array): number;

/**
 * `1 - q(λ)` at `steps + 1` evenly spaced λ in `[0, lambda_max]`.
 */
export function giant_curve(a: Float64Array, lambda_max: number, steps: number): Float64Array;

/**
 * Samples `p = λ/n` on the `round(a_1 n) × round(a_2 n)` rook graph.
 */
export function percolate(n: number, a1: number, a2: number, lambda: number, seed: number): Percolation;

/**
 * Empirical `P(T > x)` for `x = 0..=x_max` from a single type-1 ancestor
 * of the Poisson process, followed by the bound `C e^{-αx}` at the same
 * points (all NaN when λ is not subcritical).
 */
export function progeny_tail(lambda: number, a: Float64Array, trials: number, x_max: number, seed: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_percolation_free: (a: number, b: number) => void;
    readonly critical_value: (a: number, b: number) => [number, number, number];
    readonly giant_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly percolate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly percolation_components: (a: number) => number;
    readonly percolation_height: (a: number) => number;
    readonly percolation_isolated: (a: number) => number;
    readonly percolation_largest: (a: number) => number;
    readonly percolation_normalized_largest: (a: number) => number;
    readonly percolation_occupied: (a: number) => number;
    readonly percolation_predicted_fraction: (a: number) => number;
    readonly percolation_ranks: (a: number) => [number, number];
    readonly percolation_second_largest: (a: number) => number;
    readonly percolation_width: (a: number) => number;
    readonly progeny_tail: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
