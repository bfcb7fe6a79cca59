//! Bernoulli site sampling and the binary occupancy dump.

use std::io::{Read, Write};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::hash2;
use crate::torus::{TorusSpec, VertexId};

const MAGIC: &[u8; 4] = b"HTPC";
const DUMP_VERSION: u32 = 1;
const UNIT_BITS: u32 = 53;

/// One occupancy realization of the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteConfig {
    spec: TorusSpec,
    p: f64,
    seed: u64,
    words: Vec<u64>,
    occupied_count: usize,
}

/// Occupancy threshold on 53-bit uniforms: a vertex is kept iff its uniform is below it.
fn threshold(p: f64) -> u64 {
    (p * (1u64 << UNIT_BITS) as f64).round() as u64
}

fn fill_word(seed: u64, word_index: usize, volume: usize, cutoff: u64) -> u64 {
    let base = word_index * 64;
    let end = (base + 64).min(volume);
    let mut word = 0u64;
    for (bit, v) in (base..end).enumerate() {
        if (hash2(seed, v as u64) >> (64 - UNIT_BITS)) < cutoff {
            word |= 1 << bit;
        }
    }
    word
}

/// Samples each vertex independently with probability `p`.
///
/// Vertex `v` is occupied iff the counter-based uniform for `(seed, v)` falls
/// below `p`, so the result does not depend on how the work is split.
pub fn sample(spec: &TorusSpec, p: f64, seed: u64) -> Result<SiteConfig> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let volume = spec.volume();
    let cutoff = threshold(p);
    let n_words = volume.div_ceil(64);

    #[cfg(feature = "parallel")]
    let words: Vec<u64> = (0..n_words)
        .into_par_iter()
        .with_min_len(1024)
        .map(|w| fill_word(seed, w, volume, cutoff))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let words: Vec<u64> = (0..n_words)
        .map(|w| fill_word(seed, w, volume, cutoff))
        .collect();

    let occupied_count = words.iter().map(|w| w.count_ones() as usize).sum();
    Ok(SiteConfig {
        spec: spec.clone(),
        p,
        seed,
        words,
        occupied_count,
    })
}

/// `p = λ / n`.
pub fn lambda_to_p(spec: &TorusSpec, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} must be positive"
        )));
    }
    let p = lambda / spec.n() as f64;
    if p > 1.0 {
        return Err(Error::InvalidProbability(p));
    }
    Ok(p)
}

/// `p = c ln(n) / n`.
pub fn c_log_to_p(spec: &TorusSpec, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c {c} must be positive")));
    }
    let n = spec.n() as f64;
    let p = c * n.ln() / n;
    if p > 1.0 {
        return Err(Error::InvalidProbability(p));
    }
    Ok(p)
}

impl SiteConfig {
    /// A hand-built configuration. `p` is recorded as the occupied fraction and `seed` as 0.
    pub fn from_occupied(spec: &TorusSpec, occupied: &[VertexId]) -> Result<Self> {
        let volume = spec.volume();
        let mut words = vec![0u64; volume.div_ceil(64)];
        for v in occupied {
            if v.0 >= volume {
                return Err(Error::CoordinateOutOfRange(format!(
                    "vertex index {} >= {volume}",
                    v.0
                )));
            }
            words[v.0 / 64] |= 1 << (v.0 % 64);
        }
        let occupied_count = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(SiteConfig {
            spec: spec.clone(),
            p: occupied_count as f64 / volume as f64,
            seed: 0,
            words,
            occupied_count,
        })
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied_count
    }

    /// Packed occupancy, bit `v % 64` of word `v / 64`.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_occupied(&self, v: VertexId) -> bool {
        (self.words[v.0 / 64] >> (v.0 % 64)) & 1 == 1
    }

    /// Occupied vertices in ascending index order.
    pub fn occupied(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(VertexId(w * 64 + bit))
            })
        })
    }

    /// Copy with one more occupied vertex.
    pub fn with_occupied(&self, v: VertexId) -> SiteConfig {
        let mut next = self.clone();
        if !next.is_occupied(v) {
            next.words[v.0 / 64] |= 1 << (v.0 % 64);
            next.occupied_count += 1;
        }
        next
    }

    /// Writes the binary dump: `HTPC`, version, d, the sides, p, seed, then
    /// the occupancy bits packed LSB-first into `ceil(|V| / 8)` bytes.
    /// All integers are little-endian.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&DUMP_VERSION.to_le_bytes())?;
        out.write_all(&(self.spec.d() as u32).to_le_bytes())?;
        for &l in self.spec.sides() {
            out.write_all(&(l as u64).to_le_bytes())?;
        }
        out.write_all(&self.p.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        let n_bytes = self.spec.volume().div_ceil(8);
        let bytes: Vec<u8> = self
            .words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(n_bytes)
            .collect();
        out.write_all(&bytes)?;
        Ok(())
    }

    /// Reads a dump produced by [`write_dump`](Self::write_dump). The spec
    /// is rebuilt from the stored sides.
    pub fn read_dump<R: Read>(mut input: R) -> Result<SiteConfig> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut input)?;
        if version != DUMP_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let d = read_u32(&mut input)? as usize;
        if d == 0 || d > 64 {
            return Err(Error::Format(format!("implausible dimension {d}")));
        }
        let mut sides = Vec::with_capacity(d);
        for _ in 0..d {
            let l = read_u64(&mut input)?;
            sides.push(usize::try_from(l).map_err(|_| Error::TooLarge)?);
        }
        let spec = TorusSpec::from_sides(&sides)?;
        let p = f64::from_bits(read_u64(&mut input)?);
        let seed = read_u64(&mut input)?;
        let volume = spec.volume();
        let mut bytes = vec![0u8; volume.div_ceil(8)];
        input.read_exact(&mut bytes)?;
        let mut words = vec![0u64; volume.div_ceil(64)];
        for (w, chunk) in words.iter_mut().zip(bytes.chunks(8)) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            *w = u64::from_le_bytes(buf);
        }
        if let Some(last) = words.last_mut() {
            let tail = volume % 64;
            if tail != 0 && *last >> tail != 0 {
                return Err(Error::Format("bits set beyond the last vertex".into()));
            }
        }
        let occupied_count = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(SiteConfig {
            spec,
            p,
            seed,
            words,
            occupied_count,
        })
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
