/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const box_at_frame: (a: number, b: number, c: number) => [number, number];
export const parse_caption: (a: number, b: number) => [number, number];
export const preannotate: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
