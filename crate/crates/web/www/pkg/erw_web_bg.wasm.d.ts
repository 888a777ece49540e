/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_returnsensemble_free: (a: number, b: number) => void;
export const __wbg_walkview_free: (a: number, b: number) => void;
export const bd_curve: (a: number, b: number) => [number, number];
export const bd_growth_envelope: (a: number, b: number) => [number, number];
export const returnsensemble_add: (a: number, b: number) => void;
export const returnsensemble_new: (a: number, b: bigint) => number;
export const returnsensemble_replicas: (a: number) => number;
export const returnsensemble_table: (a: number) => [number, number];
export const walkview_advance: (a: number, b: number) => void;
export const walkview_counters: (a: number) => [number, number];
export const walkview_heights: (a: number, b: number) => [number, number];
export const walkview_new: (a: bigint) => number;
export const walkview_on_new_vertex: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
