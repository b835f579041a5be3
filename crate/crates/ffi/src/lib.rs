//! C ABI over the glce index: opaque handles, status codes, and flat
//! buffers. The header is generated into `include/glce.h` at build time.
//!
//! Every function is safe to call from any thread as long as a handle is
//! not freed while in use; handles are read-only after construction.

use std::ffi::{c_char, CStr};
use std::path::Path;
use std::ptr;

use glce::block_index::LayerParams;
use glce::format::read_grammar;
use glce::index_file::SlpIndex;
use glce::repair::build_grammar;
use glce::slp::QueryError;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlceStatus {
    Ok = 0,
    /// A null pointer or otherwise invalid argument.
    InvalidArgument = 1,
    /// A position beyond the string length.
    OutOfRange = 2,
    /// File could not be read or written.
    Io = 3,
    /// Grammar or index file failed to parse or verify.
    Parse = 4,
    /// Layer parameters rejected.
    BadParams = 5,
    /// Output buffer too small; the required size is reported instead.
    BufferTooSmall = 6,
}

/// Opaque index handle.
pub struct GlceIndex {
    inner: SlpIndex,
}

fn path_from(ptr: *const c_char) -> Result<&'static Path, GlceStatus> {
    if ptr.is_null() {
        return Err(GlceStatus::InvalidArgument);
    }
    let s = unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| GlceStatus::InvalidArgument)?;
    Ok(Path::new(s))
}

fn layer_params(
    layers: *const usize,
    layer_count: usize,
    n: usize,
) -> Result<LayerParams, GlceStatus> {
    if layer_count == 0 {
        return Ok(LayerParams::default_for(n));
    }
    if layers.is_null() {
        return Err(GlceStatus::InvalidArgument);
    }
    let xs = unsafe { std::slice::from_raw_parts(layers, layer_count) }.to_vec();
    LayerParams::new(xs).map_err(|_| GlceStatus::BadParams)
}

fn install(out: *mut *mut GlceIndex, idx: SlpIndex) -> GlceStatus {
    if out.is_null() {
        return GlceStatus::InvalidArgument;
    }
    unsafe { *out = Box::into_raw(Box::new(GlceIndex { inner: idx })) };
    GlceStatus::Ok
}

/// Builds an index from a grammar file in the text format.
/// Pass `layer_count = 0` to use the default layer parameters.
///
/// # Safety
/// `grammar_path` must be a valid NUL-terminated string, `layers` must point
/// to `layer_count` readable values (or be ignored when the count is 0), and
/// `out_index` must be a valid output slot.
#[no_mangle]
pub unsafe extern "C" fn glce_build_from_grammar_file(
    grammar_path: *const c_char,
    layers: *const usize,
    layer_count: usize,
    out_index: *mut *mut GlceIndex,
) -> GlceStatus {
    let path = match path_from(grammar_path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let slp = match read_grammar(path) {
        Ok(s) => s,
        Err(glce::format::GrammarIoError::Io(_)) => return GlceStatus::Io,
        Err(_) => return GlceStatus::Parse,
    };
    let params = match layer_params(layers, layer_count, slp.text_len()) {
        Ok(p) => p,
        Err(s) => return s,
    };
    install(out_index, SlpIndex::build(slp, params))
}

/// Builds an index from a raw byte string, compressing it first.
///
/// # Safety
/// `text` must point to `text_len` readable bytes; other arguments as in
/// [`glce_build_from_grammar_file`].
#[no_mangle]
pub unsafe extern "C" fn glce_build_from_text(
    text: *const u8,
    text_len: usize,
    layers: *const usize,
    layer_count: usize,
    out_index: *mut *mut GlceIndex,
) -> GlceStatus {
    if text.is_null() || text_len == 0 {
        return GlceStatus::InvalidArgument;
    }
    let bytes = unsafe { std::slice::from_raw_parts(text, text_len) };
    let codes: Vec<u32> = bytes.iter().map(|&b| b as u32).collect();
    let slp = match build_grammar(&codes) {
        Ok(s) => s,
        Err(_) => return GlceStatus::InvalidArgument,
    };
    let params = match layer_params(layers, layer_count, slp.text_len()) {
        Ok(p) => p,
        Err(s) => return s,
    };
    install(out_index, SlpIndex::build(slp, params))
}

/// Loads an index file written by [`glce_save`] or the CLI.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out_index` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn glce_load(
    path: *const c_char,
    out_index: *mut *mut GlceIndex,
) -> GlceStatus {
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match SlpIndex::load(path) {
        Ok(idx) => install(out_index, idx),
        Err(glce::index_file::IndexFileError::Io(_)) => GlceStatus::Io,
        Err(_) => GlceStatus::Parse,
    }
}

/// Writes the index to a file.
///
/// # Safety
/// `index` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn glce_save(index: *const GlceIndex, path: *const c_char) -> GlceStatus {
    let Some(idx) = (unsafe { index.as_ref() }) else {
        return GlceStatus::InvalidArgument;
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match idx.inner.save(path) {
        Ok(()) => GlceStatus::Ok,
        Err(_) => GlceStatus::Io,
    }
}

/// String length N of the indexed text.
///
/// # Safety
/// `index` must be a live handle; `out_len` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn glce_text_len(index: *const GlceIndex, out_len: *mut u64) -> GlceStatus {
    let Some(idx) = (unsafe { index.as_ref() }) else {
        return GlceStatus::InvalidArgument;
    };
    if out_len.is_null() {
        return GlceStatus::InvalidArgument;
    }
    unsafe { *out_len = idx.inner.text_len() as u64 };
    GlceStatus::Ok
}

/// Character code at position `i`.
///
/// # Safety
/// `index` must be a live handle; `out_char` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn glce_access(
    index: *const GlceIndex,
    i: u64,
    out_char: *mut u32,
) -> GlceStatus {
    let Some(idx) = (unsafe { index.as_ref() }) else {
        return GlceStatus::InvalidArgument;
    };
    if out_char.is_null() {
        return GlceStatus::InvalidArgument;
    }
    match idx.inner.access(i as usize) {
        Ok(c) => {
            unsafe { *out_char = c };
            GlceStatus::Ok
        }
        Err(QueryError::OutOfRange { .. }) => GlceStatus::OutOfRange,
        Err(_) => GlceStatus::InvalidArgument,
    }
}

/// Copies character codes `i..=j` into `buf`. `buf_len` is the capacity in
/// u32 units; the required count is stored in `out_written` either way.
///
/// # Safety
/// `index` must be a live handle; `buf` must hold `buf_len` writable u32
/// values; `out_written` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn glce_extract(
    index: *const GlceIndex,
    i: u64,
    j: u64,
    buf: *mut u32,
    buf_len: usize,
    out_written: *mut usize,
) -> GlceStatus {
    let Some(idx) = (unsafe { index.as_ref() }) else {
        return GlceStatus::InvalidArgument;
    };
    if out_written.is_null() {
        return GlceStatus::InvalidArgument;
    }
    let chars = match idx.inner.extract(i as usize, j as usize) {
        Ok(c) => c,
        Err(QueryError::OutOfRange { .. }) => return GlceStatus::OutOfRange,
        Err(_) => return GlceStatus::InvalidArgument,
    };
    unsafe { *out_written = chars.len() };
    if chars.len() > buf_len {
        return GlceStatus::BufferTooSmall;
    }
    if buf.is_null() {
        return GlceStatus::InvalidArgument;
    }
    unsafe { ptr::copy_nonoverlapping(chars.as_ptr(), buf, chars.len()) };
    GlceStatus::Ok
}

/// Longest common extension of the suffixes at `i` and `j`.
///
/// # Safety
/// `index` must be a live handle; `out_len` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn glce_lce(
    index: *const GlceIndex,
    i: u64,
    j: u64,
    out_len: *mut u64,
) -> GlceStatus {
    let Some(idx) = (unsafe { index.as_ref() }) else {
        return GlceStatus::InvalidArgument;
    };
    if out_len.is_null() {
        return GlceStatus::InvalidArgument;
    }
    match idx.inner.lce(i as usize, j as usize) {
        Ok(l) => {
            unsafe { *out_len = l as u64 };
            GlceStatus::Ok
        }
        Err(QueryError::OutOfRange { .. }) => GlceStatus::OutOfRange,
        Err(_) => GlceStatus::InvalidArgument,
    }
}

/// Frees a handle. Passing null is a no-op.
///
/// # Safety
/// `index` must have come from a build or load call and not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn glce_free(index: *mut GlceIndex) {
    if !index.is_null() {
        drop(unsafe { Box::from_raw(index) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn write_grammar_file(dir: &Path) -> CString {
        let text = "SLP 4 3\n0 -> 'a'\n1 -> 'b'\n2 -> 0 1\n3 -> 2 2\n";
        let path = dir.join("g.slp");
        std::fs::write(&path, text).unwrap();
        CString::new(path.to_str().unwrap()).unwrap()
    }

    #[test]
    fn build_query_save_load_free() {
        let dir = std::env::temp_dir().join("glce_ffi_test");
        std::fs::create_dir_all(&dir).unwrap();
        let gpath = write_grammar_file(&dir);

        let mut handle: *mut GlceIndex = ptr::null_mut();
        let st =
            unsafe { glce_build_from_grammar_file(gpath.as_ptr(), ptr::null(), 0, &mut handle) };
        assert_eq!(st, GlceStatus::Ok);
        assert!(!handle.is_null());

        let mut n = 0u64;
        assert_eq!(unsafe { glce_text_len(handle, &mut n) }, GlceStatus::Ok);
        assert_eq!(n, 4);

        let mut c = 0u32;
        assert_eq!(unsafe { glce_access(handle, 1, &mut c) }, GlceStatus::Ok);
        assert_eq!(c, b'b' as u32);
        assert_eq!(
            unsafe { glce_access(handle, 9, &mut c) },
            GlceStatus::OutOfRange
        );

        let mut l = 0u64;
        assert_eq!(unsafe { glce_lce(handle, 0, 2, &mut l) }, GlceStatus::Ok);
        assert_eq!(l, 2);

        let mut buf = [0u32; 4];
        let mut written = 0usize;
        let st = unsafe { glce_extract(handle, 0, 3, buf.as_mut_ptr(), buf.len(), &mut written) };
        assert_eq!(st, GlceStatus::Ok);
        assert_eq!(written, 4);
        assert_eq!(buf, [97, 98, 97, 98]);

        let mut tiny = [0u32; 2];
        let st = unsafe { glce_extract(handle, 0, 3, tiny.as_mut_ptr(), tiny.len(), &mut written) };
        assert_eq!(st, GlceStatus::BufferTooSmall);
        assert_eq!(written, 4);

        let ipath = CString::new(dir.join("t.idx").to_str().unwrap()).unwrap();
        assert_eq!(unsafe { glce_save(handle, ipath.as_ptr()) }, GlceStatus::Ok);

        let mut loaded: *mut GlceIndex = ptr::null_mut();
        assert_eq!(
            unsafe { glce_load(ipath.as_ptr(), &mut loaded) },
            GlceStatus::Ok
        );
        let mut l2 = 0u64;
        assert_eq!(unsafe { glce_lce(loaded, 0, 2, &mut l2) }, GlceStatus::Ok);
        assert_eq!(l2, l);

        unsafe {
            glce_free(handle);
            glce_free(loaded);
            glce_free(ptr::null_mut());
        }
    }

    #[test]
    fn build_from_text_and_custom_layers() {
        let text = b"abracadabra abracadabra";
        let mut handle: *mut GlceIndex = ptr::null_mut();
        let layers = [8usize, 64];
        let st = unsafe {
            glce_build_from_text(
                text.as_ptr(),
                text.len(),
                layers.as_ptr(),
                layers.len(),
                &mut handle,
            )
        };
        assert_eq!(st, GlceStatus::Ok);
        let mut l = 0u64;
        assert_eq!(unsafe { glce_lce(handle, 0, 12, &mut l) }, GlceStatus::Ok);
        assert_eq!(l, 11);
        unsafe { glce_free(handle) };

        let bad = [64usize, 8];
        let st = unsafe {
            glce_build_from_text(
                text.as_ptr(),
                text.len(),
                bad.as_ptr(),
                bad.len(),
                &mut handle,
            )
        };
        assert_eq!(st, GlceStatus::BadParams);
    }
}
