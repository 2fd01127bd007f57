/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * 1 for pixels inside the disk.
     */
    inside(): Uint8Array;
    /**
     * Smallest eigenvalues of `T+(C)` and `T−(C)` at level 0; `[plus, minus, eps]`.
     */
    margins(mask: Uint8Array): Float64Array;
    constructor(h_px: number, basis_size: number);
    /**
     * The greedy layer-0 support.
     */
    peel(): Uint8Array;
    reconstruct(): Outcome;
    /**
     * Simulate data for `c0 + constant` on the painted pixels.
     */
    setTruth(mask: Uint8Array, constant: number): void;
    /**
     * Pixels per grid row (the grid is square).
     */
    side(): number;
}

/**
 * Result of a full reconstruction.
 */
export class Outcome {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    layers: number;
    message: string;
    termination: string;
    /**
     * Recovered conductivity per grid pixel, row-major from the bottom row.
     */
    values: Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_get_outcome_layers: (a: number) => number;
    readonly __wbg_get_outcome_message: (a: number) => [number, number];
    readonly __wbg_get_outcome_termination: (a: number) => [number, number];
    readonly __wbg_get_outcome_values: (a: number) => [number, number];
    readonly __wbg_outcome_free: (a: number, b: number) => void;
    readonly __wbg_set_outcome_layers: (a: number, b: number) => void;
    readonly __wbg_set_outcome_message: (a: number, b: number, c: number) => void;
    readonly __wbg_set_outcome_termination: (a: number, b: number, c: number) => void;
    readonly __wbg_set_outcome_values: (a: number, b: number, c: number) => void;
    readonly demo_inside: (a: number) => [number, number];
    readonly demo_margins: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number) => [number, number, number];
    readonly demo_peel: (a: number) => [number, number, number, number];
    readonly demo_reconstruct: (a: number) => [number, number, number];
    readonly demo_setTruth: (a: number, b: number, c: number, d: number) => [number, number];
    readonly demo_side: (a: number) => number;
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
