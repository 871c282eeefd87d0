//! Convolution of integer-supported laws, exact or in floating point.

use std::collections::BTreeMap;

use num_integer::Integer;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::chain::SparseDist;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::stats::CompensatedSum;
use crate::weight::Weight;

/// Leaked mass of a convolution whose inputs leaked `la` and `lb`.
fn combined_leak(la: f64, lb: f64) -> f64 {
    la + lb - la * lb
}

fn is_symmetric<W: Weight>(d: &SparseDist<i64, W>) -> bool {
    d.iter().all(|(k, w)| {
        let m = d.get(&-k);
        m.to_f64().to_bits() == w.to_f64().to_bits() && m == *w
    })
}

/// Copy the nonnegative half onto the negative half.
fn mirror<W: Weight>(map: &mut BTreeMap<i64, W>) {
    let pos: Vec<(i64, W)> = map.range(1..).map(|(k, w)| (*k, w.clone())).collect();
    map.retain(|k, _| *k >= 0);
    for (k, w) in pos {
        map.insert(-k, w);
    }
}

/// Direct sparse convolution with any weight type.
pub fn convolve<W: Weight>(a: &SparseDist<i64, W>, b: &SparseDist<i64, W>, cutoff: f64) -> SparseDist<i64, W> {
    let mut out: BTreeMap<i64, W> = BTreeMap::new();
    for (i, wa) in a.iter() {
        for (j, wb) in b.iter() {
            let p = wa.mul(wb);
            match out.get_mut(&(i + j)) {
                Some(v) => *v = v.add(&p),
                None => {
                    out.insert(i + j, p);
                }
            }
        }
    }
    if is_symmetric(a) && is_symmetric(b) {
        mirror(&mut out);
    }
    let mut d = SparseDist::from_entries(out, combined_leak(a.leaked(), b.leaked()))
        .expect("products of nonnegative weights");
    d.truncate(cutoff);
    d
}

/// Law of the sum of `n` independent copies, by binary exponentiation with
/// direct convolutions.
pub fn self_convolve<W: Weight>(d: &SparseDist<i64, W>, n: u64, cutoff: f64) -> Result<SparseDist<i64, W>> {
    power(d, n, |x, y| Ok(convolve(x, y, cutoff)))
}

fn power<W: Weight, F>(d: &SparseDist<i64, W>, n: u64, mul: F) -> Result<SparseDist<i64, W>>
where
    F: Fn(&SparseDist<i64, W>, &SparseDist<i64, W>) -> Result<SparseDist<i64, W>>,
{
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut base = d.clone();
    let mut acc: Option<SparseDist<i64, W>> = None;
    let mut e = n;
    loop {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => mul(&a, &base)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = mul(&base, &base)?;
    }
    Ok(acc.expect("n >= 1"))
}

/// A law on `offset + stride · {0, ..., len-1}` as a dense vector.
struct Dense {
    offset: i64,
    vals: Vec<f64>,
}

/// gcd of the gaps in the support; 0 for a single point.
fn lattice_stride(d: &SparseDist<i64, f64>) -> i64 {
    let lo = *d.entries().keys().next().unwrap_or(&0);
    d.entries().keys().fold(0i64, |g, k| g.gcd(&(k - lo)))
}

fn to_dense(d: &SparseDist<i64, f64>, stride: i64) -> Dense {
    let lo = *d.entries().keys().next().unwrap_or(&0);
    let hi = *d.entries().keys().next_back().unwrap_or(&0);
    let len = ((hi - lo) / stride + 1) as usize;
    let mut vals = vec![0.0; len];
    for (k, w) in d.iter() {
        vals[((k - lo) / stride) as usize] = *w;
    }
    Dense { offset: lo, vals }
}

/// Above this many products the FFT path is used.
const FFT_THRESHOLD: usize = 1 << 22;

fn dense_direct(a: &[f64], b: &[f64], exec: Exec) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let mut out = vec![0.0; len];
    exec.fill(&mut out, |k| {
        let i_lo = k.saturating_sub(b.len() - 1);
        let i_hi = k.min(a.len() - 1);
        let mut s = CompensatedSum::default();
        for i in i_lo..=i_hi {
            s.add(a[i] * b[k - i]);
        }
        s.value()
    });
    out
}

fn dense_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let size = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|x| Complex::new(*x, 0.0)).collect();
    fa.resize(size, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|x| Complex::new(*x, 0.0)).collect();
    fb.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..len].iter().map(|c| c.re * scale).collect()
}

/// Floating-point convolution on the common lattice of the supports: dense
/// direct summation for small inputs, FFT for large ones. Values at or
/// below `max(cutoff, 0)` are dropped; negative rounding noise from the
/// transform is discarded without being counted as leaked mass.
pub fn convolve_f64(a: &SparseDist<i64, f64>, b: &SparseDist<i64, f64>, cutoff: f64, exec: Exec) -> SparseDist<i64, f64> {
    if a.is_empty() || b.is_empty() {
        return SparseDist::from_entries(Vec::<(i64, f64)>::new(), combined_leak(a.leaked(), b.leaked()))
            .expect("empty");
    }
    // Both supports sit on offset + stride·ℤ with the gcd of their strides.
    let stride = lattice_stride(a).gcd(&lattice_stride(b)).max(1);
    let da = to_dense(a, stride);
    let db = to_dense(b, stride);
    let vals = if da.vals.len().saturating_mul(db.vals.len()) > FFT_THRESHOLD {
        dense_fft(&da.vals, &db.vals)
    } else {
        dense_direct(&da.vals, &db.vals, exec)
    };
    let offset = da.offset + db.offset;
    let mut map = BTreeMap::new();
    let mut dropped = 0.0;
    for (k, v) in vals.into_iter().enumerate() {
        if v > cutoff.max(0.0) {
            map.insert(offset + k as i64 * stride, v);
        } else if v > 0.0 {
            dropped += v;
        }
    }
    if is_symmetric(a) && is_symmetric(b) {
        mirror(&mut map);
    }
    SparseDist::from_entries(map, combined_leak(a.leaked(), b.leaked()) + dropped).expect("nonnegative")
}

/// `n`-fold self-convolution in floating point.
pub fn self_convolve_f64(d: &SparseDist<i64, f64>, n: u64, cutoff: f64, exec: Exec) -> Result<SparseDist<i64, f64>> {
    power(d, n, |x, y| Ok(convolve_f64(x, y, cutoff, exec)))
}

/// Self-convolutions for every `n` in `ns`, sharing the dyadic powers.
pub fn self_convolve_schedule(
    d: &SparseDist<i64, f64>,
    ns: &[u64],
    cutoff: f64,
    exec: Exec,
) -> Result<Vec<SparseDist<i64, f64>>> {
    if ns.contains(&0) {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let top = ns.iter().copied().max().unwrap_or(1);
    let mut pows = vec![d.clone()];
    while (1u64 << pows.len()) <= top {
        let last = pows.last().expect("nonempty");
        pows.push(convolve_f64(last, last, cutoff, exec));
    }
    ns.iter()
        .map(|&n| {
            let mut acc: Option<SparseDist<i64, f64>> = None;
            for (bit, p) in pows.iter().enumerate() {
                if n >> bit & 1 == 1 {
                    acc = Some(match acc {
                        None => p.clone(),
                        Some(a) => convolve_f64(&a, p, cutoff, exec),
                    });
                }
            }
            Ok(acc.expect("n >= 1"))
        })
        .collect()
}
