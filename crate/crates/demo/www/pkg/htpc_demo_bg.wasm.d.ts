/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_percolation_free: (a: number, b: number) => void;
export const critical_value: (a: number, b: number) => [number, number, number];
export const giant_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const percolate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const percolation_components: (a: number) => number;
export const percolation_height: (a: number) => number;
export const percolation_isolated: (a: number) => number;
export const percolation_largest: (a: number) => number;
export const percolation_normalized_largest: (a: number) => number;
export const percolation_occupied: (a: number) => number;
export const percolation_predicted_fraction: (a: number) => number;
export const percolation_ranks: (a: number) => [number, number];
export const percolation_second_largest: (a: number) => number;
export const percolation_width: (a: number) => number;
export const progeny_tail: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
