/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_get_outcome_layers: (a: number) => number;
export const __wbg_get_outcome_message: (a: number) => [number, number];
export const __wbg_get_outcome_termination: (a: number) => [number, number];
export const __wbg_get_outcome_values: (a: number) => [number, number];
export const __wbg_outcome_free: (a: number, b: number) => void;
export const __wbg_set_outcome_layers: (a: number, b: number) => void;
export const __wbg_set_outcome_message: (a: number, b: number, c: number) => void;
export const __wbg_set_outcome_termination: (a: number, b: number, c: number) => void;
export const __wbg_set_outcome_values: (a: number, b: number, c: number) => void;
export const demo_inside: (a: number) => [number, number];
export const demo_margins: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_new: (a: number, b: number) => [number, number, number];
export const demo_peel: (a: number) => [number, number, number, number];
export const demo_reconstruct: (a: number) => [number, number, number];
export const demo_setTruth: (a: number, b: number, c: number, d: number) => [number, number];
export const demo_side: (a: number) => number;
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
