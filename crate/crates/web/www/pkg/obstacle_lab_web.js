/**
 * Bracket samples on characteristic points, flattened row-major over (radius, angle).
 */
export class BracketScan {
    static __wrap(ptr) {
        const obj = Object.create(BracketScan.prototype);
        obj.__wbg_ptr = ptr;
        BracketScanFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        BracketScanFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_bracketscan_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    get bracket() {
        const ret = wasm.__wbg_get_bracketscan_bracket(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get lower_bound() {
        const ret = wasm.__wbg_get_bracketscan_lower_bound(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get max_relative_error() {
        const ret = wasm.__wbg_get_bracketscan_max_relative_error(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get min_bracket() {
        const ret = wasm.__wbg_get_bracketscan_min_bracket(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get radius() {
        const ret = wasm.__wbg_get_bracketscan_radius(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {Float64Array} arg0
     */
    set bracket(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_bracketscan_bracket(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {number} arg0
     */
    set lower_bound(arg0) {
        wasm.__wbg_set_bracketscan_lower_bound(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set max_relative_error(arg0) {
        wasm.__wbg_set_bracketscan_max_relative_error(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set min_bracket(arg0) {
        wasm.__wbg_set_bracketscan_min_bracket(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set radius(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_bracketscan_radius(this.__wbg_ptr, ptr0, len0);
    }
}
if (Symbol.dispose) BracketScan.prototype[Symbol.dispose] = BracketScan.prototype.free;

/**
 * Flux traces of two circular obstacles on the full unit circle, and the discrimination verdict.
 */
export class Comparison {
    static __wrap(ptr) {
        const obj = Object.create(Comparison.prototype);
        obj.__wbg_ptr = ptr;
        ComparisonFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        ComparisonFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_comparison_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    get angle() {
        const ret = wasm.__wbg_get_comparison_angle(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get distance() {
        const ret = wasm.__wbg_get_comparison_distance(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {boolean}
     */
    get distinguishable() {
        const ret = wasm.__wbg_get_comparison_distinguishable(this.__wbg_ptr);
        return ret !== 0;
    }
    /**
     * @returns {number}
     */
    get floor() {
        const ret = wasm.__wbg_get_comparison_floor(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get flux_0() {
        const ret = wasm.__wbg_get_comparison_flux_0(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {Float64Array}
     */
    get flux_1() {
        const ret = wasm.__wbg_get_comparison_flux_1(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {Float64Array} arg0
     */
    set angle(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_comparison_angle(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {number} arg0
     */
    set distance(arg0) {
        wasm.__wbg_set_comparison_distance(this.__wbg_ptr, arg0);
    }
    /**
     * @param {boolean} arg0
     */
    set distinguishable(arg0) {
        wasm.__wbg_set_comparison_distinguishable(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set floor(arg0) {
        wasm.__wbg_set_comparison_floor(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set flux_0(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_comparison_flux_0(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set flux_1(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_comparison_flux_1(this.__wbg_ptr, ptr0, len0);
    }
}
if (Symbol.dispose) Comparison.prototype[Symbol.dispose] = Comparison.prototype.free;

/**
 * Nonzero 1D solution with three vanishing Cauchy values.
 */
export class Counterexample {
    static __wrap(ptr) {
        const obj = Object.create(Counterexample.prototype);
        obj.__wbg_ptr = ptr;
        CounterexampleFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        CounterexampleFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_counterexample_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get residual() {
        const ret = wasm.__wbg_get_counterexample_residual(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get sweeps() {
        const ret = wasm.__wbg_get_counterexample_sweeps(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {Float64Array}
     */
    get x() {
        const ret = wasm.__wbg_get_counterexample_x(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get y_x0() {
        const ret = wasm.__wbg_get_counterexample_y_x0(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get y() {
        const ret = wasm.__wbg_get_counterexample_y(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get z_x0() {
        const ret = wasm.__wbg_get_counterexample_z_x0(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get z() {
        const ret = wasm.__wbg_get_counterexample_z(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {number} arg0
     */
    set residual(arg0) {
        wasm.__wbg_set_counterexample_residual(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set sweeps(arg0) {
        wasm.__wbg_set_counterexample_sweeps(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set x(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_counterexample_x(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {number} arg0
     */
    set y_x0(arg0) {
        wasm.__wbg_set_counterexample_y_x0(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set y(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_counterexample_y(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {number} arg0
     */
    set z_x0(arg0) {
        wasm.__wbg_set_counterexample_z_x0(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set z(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_counterexample_z(this.__wbg_ptr, ptr0, len0);
    }
}
if (Symbol.dispose) Counterexample.prototype[Symbol.dispose] = Counterexample.prototype.free;

/**
 * @param {number} delta_factor
 * @param {number} r
 * @param {number} n_r
 * @param {number} n_theta
 * @returns {BracketScan}
 */
export function carleman_bracket(delta_factor, r, n_r, n_theta) {
    const ret = wasm.carleman_bracket(delta_factor, r, n_r, n_theta);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return BracketScan.__wrap(ret[0]);
}

/**
 * @param {number} r0
 * @param {number} r1
 * @param {number} offset
 * @param {number} b
 * @param {number} a
 * @param {number} h
 * @returns {Comparison}
 */
export function compare_circles(r0, r1, offset, b, a, h) {
    const ret = wasm.compare_circles(r0, r1, offset, b, a, h);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Comparison.__wrap(ret[0]);
}

/**
 * @param {number} eta
 * @param {number} zeta
 * @param {number} b
 * @param {number} a
 * @param {number} k
 * @param {number} l
 * @param {number} points
 * @returns {Counterexample}
 */
export function counterexample(eta, zeta, b, a, k, l, points) {
    const ret = wasm.counterexample(eta, zeta, b, a, k, l, points);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Counterexample.__wrap(ret[0]);
}

/**
 * @returns {string}
 */
export function version() {
    let deferred1_0;
    let deferred1_1;
    try {
        const ret = wasm.version();
        deferred1_0 = ret[0];
        deferred1_1 = ret[1];
        return getStringFromWasm0(ret[0], ret[1]);
    } finally {
        wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
    }
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
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
        "./obstacle_lab_web_bg.js": import0,
    };
}

const BracketScanFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_bracketscan_free(ptr, 1));
const ComparisonFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_comparison_free(ptr, 1));
const CounterexampleFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_counterexample_free(ptr, 1));

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

function passArrayF64ToWasm0(arg, malloc) {
    const ptr = malloc(arg.length * 8, 8) >>> 0;
    getFloat64ArrayMemory0().set(arg, ptr / 8);
    WASM_VECTOR_LEN = arg.length;
    return ptr;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
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

let WASM_VECTOR_LEN = 0;

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
        module_or_path = new URL('obstacle_lab_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
