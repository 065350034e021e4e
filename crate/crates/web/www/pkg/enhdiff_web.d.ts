/* tslint:disable */
/* eslint-disable */

/**
 * Annular datum rotated by `u = r^q (−y, x)` with diffusivity `κ r^γ`.
 */
export class PolarDemo {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): void;
    constructor(q: number, gamma: number, kappa: number, size: number, dt: number);
    r_max(): number;
    r_min(): number;
    relative_norm(): number;
    size(): number;
    time(): number;
    /**
     * Field values, row `i` at radius `r_i`, column `j` at angle `θ_j`.
     */
    values(): Float64Array;
}

/**
 * `ρ0 = φ(y) sin x` advected by `u = (y^n, 0)` on a periodic strip.
 */
export class ShearDemo {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): void;
    constructor(n: number, kappa: number, size: number, dt: number);
    /**
     * `‖ρ(t)‖ / ‖ρ0‖`.
     */
    relative_norm(): number;
    size(): number;
    time(): number;
    /**
     * Field values, rows bottom to top.
     */
    values(): Float64Array;
}

/**
 * Predicted `d log T / d log κ`. `kind` is `shear` (parameter `n`),
 * `holder` (`α`) or `circular` (`q`, with radial exponent `gamma`).
 */
export function predictedSlope(kind: string, parameter: number, gamma: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_polardemo_free: (a: number, b: number) => void;
    readonly __wbg_sheardemo_free: (a: number, b: number) => void;
    readonly polardemo_advance: (a: number, b: number) => void;
    readonly polardemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly polardemo_r_max: (a: number) => number;
    readonly polardemo_r_min: (a: number) => number;
    readonly polardemo_relative_norm: (a: number) => number;
    readonly polardemo_size: (a: number) => number;
    readonly polardemo_time: (a: number) => number;
    readonly polardemo_values: (a: number) => [number, number, number, number];
    readonly predictedSlope: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly sheardemo_advance: (a: number, b: number) => [number, number];
    readonly sheardemo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly sheardemo_relative_norm: (a: number) => number;
    readonly sheardemo_size: (a: number) => number;
    readonly sheardemo_time: (a: number) => number;
    readonly sheardemo_values: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
