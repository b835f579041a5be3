//! Binary index files.
//!
//! Layout: magic `GLCE1`, a u32 version, then little-endian sections, each
//! framed as a 4-byte tag, a u64 payload length, the payload, and a CRC32 of
//! the payload. Sections hold the grammar, layer parameters, the top block
//! tables, per-layer decompositions, leaf strings, and the LCE arrays.
//! Derived data (rank maps, range-minimum tables, difference covers, span
//! offsets) is rebuilt on load, so a loaded index answers queries exactly
//! like the one that was saved.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::block_index::{InnerBlock, Layer, LayerParams, LayerStats, LayeredIndex};
use crate::lce_core::{FullLce, SparseLce};
use crate::lce_index::{InnerModulus, LceConfig, LceIndex, LceTrace};
use crate::slp::{QueryError, Rule, Slp, Symbol};

const MAGIC: &[u8; 5] = b"GLCE1";
const VERSION: u32 = 1;

const SEC_GRAM: &[u8; 4] = b"GRAM";
const SEC_PRMS: &[u8; 4] = b"PRMS";
const SEC_TOPB: &[u8; 4] = b"TOPB";
const SEC_LAYR: &[u8; 4] = b"LAYR";
const SEC_LEAF: &[u8; 4] = b"LEAF";
const SEC_LCES: &[u8; 4] = b"LCES";

#[derive(Debug)]
pub enum IndexFileError {
    Io(io::Error),
    BadMagic,
    BadVersion(u32),
    ChecksumMismatch { section: String },
    Truncated,
    Malformed(String),
}

impl fmt::Display for IndexFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexFileError::Io(e) => write!(f, "io error: {e}"),
            IndexFileError::BadMagic => write!(f, "not an index file (bad magic)"),
            IndexFileError::BadVersion(v) => write!(f, "unsupported index version {v}"),
            IndexFileError::ChecksumMismatch { section } => {
                write!(f, "checksum mismatch in section {section}")
            }
            IndexFileError::Truncated => write!(f, "file ends before its sections do"),
            IndexFileError::Malformed(msg) => write!(f, "malformed index: {msg}"),
        }
    }
}

impl std::error::Error for IndexFileError {}

impl From<io::Error> for IndexFileError {
    fn from(e: io::Error) -> Self {
        IndexFileError::Io(e)
    }
}

/// A built index bundled with its source grammar, ready to serve queries
/// and round-trip through a file.
pub struct SlpIndex {
    slp: Slp,
    lce: LceIndex,
}

impl SlpIndex {
    pub fn build(slp: Slp, params: LayerParams) -> Self {
        Self::build_with(slp, params, LceConfig::default())
    }

    pub fn build_with(slp: Slp, params: LayerParams, config: LceConfig) -> Self {
        let layered = LayeredIndex::build(&slp, params);
        let lce = LceIndex::build_with(layered, config);
        SlpIndex { slp, lce }
    }

    pub fn grammar(&self) -> &Slp {
        &self.slp
    }

    pub fn lce_index(&self) -> &LceIndex {
        &self.lce
    }

    pub fn layered(&self) -> &LayeredIndex {
        self.lce.base()
    }

    pub fn text_len(&self) -> usize {
        self.lce.text_len()
    }

    pub fn access(&self, i: usize) -> Result<u32, QueryError> {
        self.layered().access(i)
    }

    pub fn extract(&self, i: usize, j: usize) -> Result<Vec<u32>, QueryError> {
        self.layered().extract(i, j)
    }

    pub fn lce(&self, i: usize, j: usize) -> Result<usize, QueryError> {
        self.lce.lce(i, j)
    }

    pub fn lce_instrumented(&self, i: usize, j: usize) -> Result<(usize, LceTrace), QueryError> {
        self.lce.lce_instrumented(i, j)
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexFileError> {
        let bytes = self.to_bytes();
        let mut f = fs::File::create(path)?;
        f.write_all(&bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexFileError> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);

        section(&mut out, SEC_GRAM, &encode_grammar(&self.slp));
        section(&mut out, SEC_PRMS, &self.encode_params());
        section(&mut out, SEC_TOPB, &self.encode_top());
        section(&mut out, SEC_LAYR, &self.encode_layers());
        section(&mut out, SEC_LEAF, &self.encode_leaves());
        section(&mut out, SEC_LCES, &self.encode_lce());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexFileError> {
        let mut r = Reader { buf: bytes, pos: 0 };
        let magic = r.take(MAGIC.len())?;
        if magic != MAGIC {
            return Err(IndexFileError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(IndexFileError::BadVersion(version));
        }

        let gram = r.section(SEC_GRAM)?;
        let slp = decode_grammar(&mut Reader { buf: gram, pos: 0 })?;

        let prms = r.section(SEC_PRMS)?;
        let (params, config, n_chars) = decode_params(&mut Reader { buf: prms, pos: 0 })?;

        let topb = r.section(SEC_TOPB)?;
        let (top_basics, top_starts, top_window) = decode_top(&mut Reader { buf: topb, pos: 0 })?;

        let layr = r.section(SEC_LAYR)?;
        let layers = decode_layers(&mut Reader { buf: layr, pos: 0 }, params.layer_count())?;

        let leaf = r.section(SEC_LEAF)?;
        let leaf_strings = decode_leaves(&mut Reader { buf: leaf, pos: 0 })?;

        let lces = r.section(SEC_LCES)?;
        let (top_sparse, layer_sparse, leaf_full) =
            decode_lce(&mut Reader { buf: lces, pos: 0 }, params.layer_count())?;

        let layered = LayeredIndex::from_parts(
            params,
            n_chars,
            layers,
            top_basics,
            top_starts,
            top_window,
            leaf_strings,
        );
        let lce = LceIndex::from_parts(layered, config, top_sparse, layer_sparse, leaf_full)
            .map_err(IndexFileError::Malformed)?;
        Ok(SlpIndex { slp, lce })
    }

    fn encode_params(&self) -> Vec<u8> {
        let mut p = Vec::new();
        let params = self.layered().params();
        put_u32(&mut p, params.layer_count() as u32);
        for &x in params.xs() {
            put_u64(&mut p, x as u64);
        }
        p.push(match self.lce.config().inner_modulus {
            InnerModulus::BelowLayer => 0,
            InnerModulus::OwnLayer => 1,
        });
        put_u64(&mut p, self.text_len() as u64);
        p
    }

    fn encode_top(&self) -> Vec<u8> {
        let mut p = Vec::new();
        let base = self.layered();
        put_u64(&mut p, base.top_basics.len() as u64);
        for &b in &base.top_basics {
            put_u32(&mut p, b);
        }
        for &s in &base.top_starts {
            put_u32(&mut p, s);
        }
        put_u64(&mut p, base.top_window.len() as u64);
        for &(r, o) in &base.top_window {
            put_u32(&mut p, r);
            put_u32(&mut p, o);
        }
        p
    }

    fn encode_layers(&self) -> Vec<u8> {
        let mut p = Vec::new();
        for layer in &self.layered().layers {
            let st = &layer.stats;
            put_u64(&mut p, st.x as u64);
            put_u64(&mut p, st.blocks as u64);
            put_u64(&mut p, st.distinct as u64);
            put_u32(&mut p, st.k_max as u32);
            put_u32(&mut p, st.inner_k_max as u32);
            put_u64(&mut p, st.added_rules as u64);
            put_u64(&mut p, st.grammar_rules as u64);
            put_u32(&mut p, layer.basic_lens.len() as u32);
            for &l in &layer.basic_lens {
                put_u64(&mut p, l as u64);
            }
            match &layer.inner {
                None => p.push(0),
                Some(blocks) => {
                    p.push(1);
                    for ib in blocks {
                        put_u64(&mut p, ib.local_basics.len() as u64);
                        for &b in &ib.local_basics {
                            put_u32(&mut p, b);
                        }
                        for &s in &ib.local_starts {
                            put_u32(&mut p, s);
                        }
                        put_u64(&mut p, ib.window.len() as u64);
                        for &(r, o) in &ib.window {
                            put_u32(&mut p, r);
                            put_u32(&mut p, o);
                        }
                    }
                }
            }
        }
        p
    }

    fn encode_leaves(&self) -> Vec<u8> {
        let mut p = Vec::new();
        let leaves = &self.layered().leaf_strings;
        put_u32(&mut p, leaves.len() as u32);
        for s in leaves {
            put_u64(&mut p, s.len() as u64);
            for &c in s {
                put_u32(&mut p, c);
            }
        }
        p
    }

    fn encode_lce(&self) -> Vec<u8> {
        let mut p = Vec::new();
        encode_sparse(&mut p, self.lce.top_sparse());
        put_u32(&mut p, self.lce.layer_sparse_count() as u32);
        for li in 0..self.lce.layer_sparse_count() {
            let (sparse, tau) = self.lce.layer_sparse_parts(li);
            put_u64(&mut p, tau as u64);
            encode_sparse(&mut p, sparse);
        }
        let full = self.lce.leaf_full();
        put_u64(&mut p, full.text_len() as u64);
        for &s in full.suffix_array() {
            put_u32(&mut p, s);
        }
        for v in full.lcp() {
            put_u32(&mut p, v);
        }
        p
    }
}

fn encode_sparse(p: &mut Vec<u8>, s: &SparseLce) {
    put_u64(p, s.text_len() as u64);
    put_u64(p, s.sampled_count() as u64);
    for &pos in s.sampled_order() {
        put_u32(p, pos);
    }
    for v in s.sampled_lcp() {
        put_u32(p, v);
    }
}

fn decode_sparse(r: &mut Reader<'_>) -> Result<SparseLce, IndexFileError> {
    let text_len = r.u64()? as usize;
    let count = r.u64()? as usize;
    let order = r.u32_vec(count)?;
    let lcp = r.u32_vec(count)?;
    Ok(SparseLce::from_arrays(text_len, order, lcp))
}

fn encode_grammar(slp: &Slp) -> Vec<u8> {
    let mut p = Vec::new();
    put_u32(&mut p, slp.num_rules() as u32);
    put_u32(&mut p, slp.root().0);
    for rule in slp.rules() {
        match *rule {
            Rule::Terminal(c) => {
                p.push(0);
                put_u32(&mut p, c);
            }
            Rule::Pair(l, r) => {
                p.push(1);
                put_u32(&mut p, l.0);
                put_u32(&mut p, r.0);
            }
        }
    }
    p
}

fn decode_grammar(r: &mut Reader<'_>) -> Result<Slp, IndexFileError> {
    let n = r.u32()? as usize;
    let root = r.u32()?;
    let mut rules = Vec::with_capacity(n.min(r.remaining()));
    for _ in 0..n {
        let tag = r.u8()?;
        rules.push(match tag {
            0 => Rule::Terminal(r.u32()?),
            1 => Rule::Pair(Symbol(r.u32()?), Symbol(r.u32()?)),
            t => return Err(IndexFileError::Malformed(format!("bad rule tag {t}"))),
        });
    }
    Slp::new(rules, Symbol(root))
        .map_err(|e| IndexFileError::Malformed(format!("stored grammar invalid: {e}")))
}

fn decode_params(r: &mut Reader<'_>) -> Result<(LayerParams, LceConfig, usize), IndexFileError> {
    let k = r.u32()? as usize;
    let mut xs = Vec::with_capacity(k.min(r.remaining()));
    for _ in 0..k {
        xs.push(r.u64()? as usize);
    }
    let params = LayerParams::new(xs)
        .map_err(|e| IndexFileError::Malformed(format!("stored params invalid: {e}")))?;
    let config = LceConfig {
        inner_modulus: match r.u8()? {
            0 => InnerModulus::BelowLayer,
            1 => InnerModulus::OwnLayer,
            t => return Err(IndexFileError::Malformed(format!("bad modulus tag {t}"))),
        },
    };
    let n_chars = r.u64()? as usize;
    Ok((params, config, n_chars))
}

type TopTables = (Vec<u32>, Vec<u32>, Vec<(u32, u32)>);

fn decode_top(r: &mut Reader<'_>) -> Result<TopTables, IndexFileError> {
    let m = r.u64()? as usize;
    let basics = r.u32_vec(m)?;
    let starts = r.u32_vec(m + 1)?;
    let wcount = r.u64()? as usize;
    let window = r.pair_vec(wcount)?;
    Ok((basics, starts, window))
}

fn decode_layers(r: &mut Reader<'_>, k: usize) -> Result<Vec<Layer>, IndexFileError> {
    let mut layers = Vec::with_capacity(k);
    for _ in 0..k {
        let x = r.u64()? as usize;
        let blocks = r.u64()? as usize;
        let distinct = r.u64()? as usize;
        let k_max = r.u32()? as usize;
        let inner_k_max = r.u32()? as usize;
        let added_rules = r.u64()? as usize;
        let grammar_rules = r.u64()? as usize;
        let basic_count = r.u32()? as usize;
        let basic_lens: Vec<usize> = r
            .u64_vec(basic_count)?
            .into_iter()
            .map(|v| v as usize)
            .collect();
        let has_inner = r.u8()?;
        let inner = match has_inner {
            0 => None,
            1 => {
                let mut blocks_v = Vec::with_capacity(basic_count);
                for _ in 0..basic_count {
                    let local_count = r.u64()? as usize;
                    let local_basics = r.u32_vec(local_count)?;
                    let local_starts = r.u32_vec(local_count + 1)?;
                    let wcount = r.u64()? as usize;
                    let window = r.pair_vec(wcount)?;
                    blocks_v.push(InnerBlock {
                        local_basics,
                        local_starts,
                        window,
                    });
                }
                Some(blocks_v)
            }
            t => return Err(IndexFileError::Malformed(format!("bad inner tag {t}"))),
        };
        layers.push(Layer {
            stats: LayerStats {
                x,
                blocks,
                distinct,
                k_max,
                inner_k_max,
                added_rules,
                grammar_rules,
            },
            basic_lens,
            inner,
        });
    }
    Ok(layers)
}

fn decode_leaves(r: &mut Reader<'_>) -> Result<Vec<Vec<u32>>, IndexFileError> {
    let d = r.u32()? as usize;
    let mut out = Vec::with_capacity(d.min(r.remaining()));
    for _ in 0..d {
        let len = r.u64()? as usize;
        out.push(r.u32_vec(len)?);
    }
    Ok(out)
}

type LceParts = (SparseLce, Vec<(SparseLce, usize)>, FullLce);

fn decode_lce(r: &mut Reader<'_>, _k: usize) -> Result<LceParts, IndexFileError> {
    let top = decode_sparse(r)?;
    let count = r.u32()? as usize;
    let mut layer_sparse = Vec::with_capacity(count.min(r.remaining()));
    for _ in 0..count {
        let tau = r.u64()? as usize;
        layer_sparse.push((decode_sparse(r)?, tau));
    }
    let full_len = r.u64()? as usize;
    let sa = r.u32_vec(full_len)?;
    let lcp = r.u32_vec(full_len)?;
    Ok((top, layer_sparse, FullLce::from_arrays(full_len, sa, lcp)))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn section(out: &mut Vec<u8>, tag: &[u8; 4], payload: &[u8]) {
    out.extend_from_slice(tag);
    put_u64(out, payload.len() as u64);
    out.extend_from_slice(payload);
    put_u32(out, crc32fast::hash(payload));
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexFileError> {
        if self.remaining() < n {
            return Err(IndexFileError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, IndexFileError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IndexFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IndexFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32_vec(&mut self, count: usize) -> Result<Vec<u32>, IndexFileError> {
        if self.remaining() / 4 < count {
            return Err(IndexFileError::Truncated);
        }
        let raw = self.take(count * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn u64_vec(&mut self, count: usize) -> Result<Vec<u64>, IndexFileError> {
        if self.remaining() / 8 < count {
            return Err(IndexFileError::Truncated);
        }
        let raw = self.take(count * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn pair_vec(&mut self, count: usize) -> Result<Vec<(u32, u32)>, IndexFileError> {
        if self.remaining() / 8 < count {
            return Err(IndexFileError::Truncated);
        }
        let raw = self.take(count * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| {
                (
                    u32::from_le_bytes(c[0..4].try_into().unwrap()),
                    u32::from_le_bytes(c[4..8].try_into().unwrap()),
                )
            })
            .collect())
    }

    /// Reads one section with the expected tag, verifying its checksum, and
    /// returns the payload slice.
    fn section(&mut self, tag: &[u8; 4]) -> Result<&'a [u8], IndexFileError> {
        let got = self.take(4)?;
        if got != tag {
            return Err(IndexFileError::Malformed(format!(
                "expected section {}, found {}",
                String::from_utf8_lossy(tag),
                String::from_utf8_lossy(got)
            )));
        }
        let len = self.u64()? as usize;
        let payload = self.take(len)?;
        let stored = self.u32()?;
        if crc32fast::hash(payload) != stored {
            return Err(IndexFileError::ChecksumMismatch {
                section: String::from_utf8_lossy(tag).into_owned(),
            });
        }
        Ok(payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_synthetic, random_slp, RandomSlpConfig, SyntheticKind};

    fn sample_index() -> SlpIndex {
        let slp = gen_synthetic(SyntheticKind::Fibonacci { order: 14 });
        SlpIndex::build(slp, LayerParams::new(vec![6, 36]).unwrap())
    }

    #[test]
    fn round_trip_answers_identically() {
        let idx = sample_index();
        let bytes = idx.to_bytes();
        let back = SlpIndex::from_bytes(&bytes).unwrap();
        assert_eq!(back.text_len(), idx.text_len());
        let n = idx.text_len();
        for i in 0..n {
            assert_eq!(back.access(i).unwrap(), idx.access(i).unwrap());
        }
        for i in (0..n).step_by(3) {
            for j in (0..n).step_by(5) {
                assert_eq!(back.lce(i, j).unwrap(), idx.lce(i, j).unwrap());
            }
        }
        assert_eq!(
            back.grammar().expand().unwrap(),
            idx.grammar().expand().unwrap()
        );
    }

    #[test]
    fn round_trip_through_a_file() {
        let idx = sample_index();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.idx");
        idx.save(&path).unwrap();
        let back = SlpIndex::load(&path).unwrap();
        assert_eq!(
            back.extract(0, idx.text_len() - 1).unwrap(),
            idx.extract(0, idx.text_len() - 1).unwrap()
        );
    }

    #[test]
    fn corrupted_payload_bytes_are_rejected() {
        let idx = sample_index();
        let bytes = idx.to_bytes();
        // Flip one byte in every position after the header; each must fail
        // loudly or leave the answers identical (never silently wrong).
        let mut rejected = 0usize;
        for pos in (9..bytes.len()).step_by(97) {
            let mut bad = bytes.clone();
            bad[pos] ^= 0xff;
            match SlpIndex::from_bytes(&bad) {
                Err(_) => rejected += 1,
                Ok(_) => panic!("corruption at byte {pos} went unnoticed"),
            }
        }
        assert!(rejected > 0);
    }

    #[test]
    fn truncation_and_magic_are_detected() {
        let idx = sample_index();
        let bytes = idx.to_bytes();
        assert!(matches!(
            SlpIndex::from_bytes(&bytes[..4]),
            Err(IndexFileError::Truncated) | Err(IndexFileError::BadMagic)
        ));
        assert!(matches!(
            SlpIndex::from_bytes(&bytes[..bytes.len() - 3]),
            Err(IndexFileError::Truncated)
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            SlpIndex::from_bytes(&bad),
            Err(IndexFileError::BadMagic)
        ));
        let mut bad = bytes;
        bad[5] = 9; // version
        assert!(matches!(
            SlpIndex::from_bytes(&bad),
            Err(IndexFileError::BadVersion(_))
        ));
    }

    #[test]
    fn single_character_pipeline() {
        let slp = Slp::new(vec![Rule::Terminal(b'z' as u32)], Symbol(0)).unwrap();
        let idx = SlpIndex::build(slp, LayerParams::new(vec![8, 64]).unwrap());
        assert_eq!(idx.text_len(), 1);
        assert_eq!(idx.access(0).unwrap(), b'z' as u32);
        assert_eq!(idx.lce(0, 0).unwrap(), 1);
        let back = SlpIndex::from_bytes(&idx.to_bytes()).unwrap();
        assert_eq!(back.access(0).unwrap(), b'z' as u32);
    }

    #[test]
    fn round_trip_on_random_corpus() {
        for seed in [1u64, 5, 9] {
            let slp = random_slp(
                RandomSlpConfig {
                    pair_rules: 70,
                    alphabet: 4,
                    max_len: 3000,
                },
                seed,
            );
            let idx = SlpIndex::build(slp, LayerParams::new(vec![8, 64]).unwrap());
            let back = SlpIndex::from_bytes(&idx.to_bytes()).unwrap();
            let n = idx.text_len();
            for q in 0..400 {
                let i = (q * 7919) % n;
                let j = (q * 104729) % n;
                assert_eq!(back.lce(i, j).unwrap(), idx.lce(i, j).unwrap());
                assert_eq!(back.access(i).unwrap(), idx.access(i).unwrap());
            }
        }
    }
}
