/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_polardemo_free: (a: number, b: number) => void;
export const __wbg_sheardemo_free: (a: number, b: number) => void;
export const polardemo_advance: (a: number, b: number) => void;
export const polardemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const polardemo_r_max: (a: number) => number;
export const polardemo_r_min: (a: number) => number;
export const polardemo_relative_norm: (a: number) => number;
export const polardemo_size: (a: number) => number;
export const polardemo_time: (a: number) => number;
export const polardemo_values: (a: number) => [number, number, number, number];
export const predictedSlope: (a: number, b: number, c: number, d: number) => [number, number, number];
export const sheardemo_advance: (a: number, b: number) => [number, number];
export const sheardemo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const sheardemo_relative_norm: (a: number) => number;
export const sheardemo_size: (a: number) => number;
export const sheardemo_time: (a: number) => number;
export const sheardemo_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
