/* @ts-self-types="./erw_web.d.ts" */

/**
 * Returns-to-origin ensemble on horizons `2^6..2^max_pow`, grown in
 * batches so the page stays responsive.
 */
export class ReturnsEnsemble {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        ReturnsEnsembleFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_returnsensemble_free(ptr, 0);
    }
    /**
     * Add `count` more replicas.
     * @param {number} count
     */
    add(count) {
        wasm.returnsensemble_add(this.__wbg_ptr, count);
    }
    /**
     * @param {number} max_pow
     * @param {bigint} seed
     */
    constructor(max_pow, seed) {
        const ret = wasm.returnsensemble_new(max_pow, seed);
        this.__wbg_ptr = ret;
        ReturnsEnsembleFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * @returns {number}
     */
    replicas() {
        const ret = wasm.returnsensemble_replicas(this.__wbg_ptr);
        return ret;
    }
    /**
     * Rows `[t, sqrt(log t), mean, ci_lo, ci_hi]`, flattened. Empty until
     * two replicas have run.
     * @returns {Float64Array}
     */
    table() {
        const ret = wasm.returnsensemble_table(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) ReturnsEnsemble.prototype[Symbol.dispose] = ReturnsEnsemble.prototype.free;

/**
 * A single half-space walk that the page advances in slices.
 */
export class WalkView {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        WalkViewFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_walkview_free(ptr, 0);
    }
    /**
     * Run `steps` more steps.
     * @param {number} steps
     */
    advance(steps) {
        wasm.walkview_advance(this.__wbg_ptr, steps);
    }
    /**
     * `[t, V(t;0), F, N, DF, z, x, y]`.
     * @returns {Float64Array}
     */
    counters() {
        const ret = wasm.walkview_counters(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Column heights on the square `|x|, |y| <= radius`, row by row from
     * `y = -radius`. A visited floor point with an empty column reports
     * 0.5 so the page can tell it from an untouched one.
     * @param {number} radius
     * @returns {Float64Array}
     */
    heights(radius) {
        const ret = wasm.walkview_heights(this.__wbg_ptr, radius);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {bigint} seed
     */
    constructor(seed) {
        const ret = wasm.walkview_new(seed);
        this.__wbg_ptr = ret;
        WalkViewFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * True when the walker stands on a vertex it has not visited before.
     * @returns {boolean}
     */
    on_new_vertex() {
        const ret = wasm.walkview_on_new_vertex(this.__wbg_ptr);
        return ret !== 0;
    }
}
if (Symbol.dispose) WalkView.prototype[Symbol.dispose] = WalkView.prototype.free;

/**
 * Hitting probabilities `r_1..r_n` of the chain on `{1..n}` with constant
 * up-probability `q`. Empty on invalid input.
 * @param {number} n
 * @param {number} q
 * @returns {Float64Array}
 */
export function bd_curve(n, q) {
    const ret = wasm.bd_curve(n, q);
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}

/**
 * Upper envelope `r_j <= (1 + c)^(j - n)` implied by the growth ratio with
 * `c = (1 - 2q) / (1 - q)`, for `q < 1/2`.
 * @param {number} n
 * @param {number} q
 * @returns {Float64Array}
 */
export function bd_growth_envelope(n, q) {
    const ret = wasm.bd_growth_envelope(n, q);
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./erw_web_bg.js": import0,
    };
}

const ReturnsEnsembleFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_returnsensemble_free(ptr, 1));
const WalkViewFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_walkview_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('erw_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
