//! Deterministic data-parallel reductions.
//!
//! Every reduction splits its index range into fixed-size chunks, reduces each
//! chunk with the same pairwise tree, then reduces the chunk partials with the
//! pairwise tree again. The chunking never depends on the worker count, so the
//! sequential and the rayon-backed versions return bit-identical results.

use rustfft::num_complex::Complex64;

/// Number of indices reduced per leaf task.
pub const CHUNK: usize = 1 << 12;

const LEAF: usize = 32;

/// Pairwise (tree) sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of complex values.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

fn chunk_ranges(len: usize) -> impl Iterator<Item = std::ops::Range<usize>> + Clone {
    (0..len.div_ceil(CHUNK)).map(move |c| c * CHUNK..((c + 1) * CHUNK).min(len))
}

fn chunk_real<F: Fn(usize) -> f64>(r: std::ops::Range<usize>, f: &F) -> f64 {
    let buf: Vec<f64> = r.map(f).collect();
    pairwise_sum(&buf)
}

fn chunk_complex<F: Fn(usize) -> Complex64>(r: std::ops::Range<usize>, f: &F) -> Complex64 {
    let buf: Vec<Complex64> = r.map(f).collect();
    pairwise_sum_complex(&buf)
}

/// Sequential fixed-tree sum of `f(i)` for `i in 0..len`.
pub fn tree_sum_seq<F: Fn(usize) -> f64>(len: usize, f: F) -> f64 {
    let partials: Vec<f64> = chunk_ranges(len).map(|r| chunk_real(r, &f)).collect();
    pairwise_sum(&partials)
}

/// Sequential fixed-tree complex sum of `f(i)` for `i in 0..len`.
pub fn tree_sum_complex_seq<F: Fn(usize) -> Complex64>(len: usize, f: F) -> Complex64 {
    let partials: Vec<Complex64> = chunk_ranges(len).map(|r| chunk_complex(r, &f)).collect();
    pairwise_sum_complex(&partials)
}

/// Fixed-tree sum of `f(i)` for `i in 0..len`, parallel over chunks.
#[cfg(feature = "parallel")]
pub fn tree_sum<F: Fn(usize) -> f64 + Sync + Send>(len: usize, f: F) -> f64 {
    use rayon::prelude::*;
    let nchunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..nchunks)
        .into_par_iter()
        .map(|c| chunk_real(c * CHUNK..((c + 1) * CHUNK).min(len), &f))
        .collect();
    pairwise_sum(&partials)
}

#[cfg(not(feature = "parallel"))]
pub fn tree_sum<F: Fn(usize) -> f64 + Sync + Send>(len: usize, f: F) -> f64 {
    tree_sum_seq(len, f)
}

/// Fixed-tree complex sum, parallel over chunks.
#[cfg(feature = "parallel")]
pub fn tree_sum_complex<F: Fn(usize) -> Complex64 + Sync + Send>(len: usize, f: F) -> Complex64 {
    use rayon::prelude::*;
    let nchunks = len.div_ceil(CHUNK);
    let partials: Vec<Complex64> = (0..nchunks)
        .into_par_iter()
        .map(|c| chunk_complex(c * CHUNK..((c + 1) * CHUNK).min(len), &f))
        .collect();
    pairwise_sum_complex(&partials)
}

#[cfg(not(feature = "parallel"))]
pub fn tree_sum_complex<F: Fn(usize) -> Complex64 + Sync + Send>(len: usize, f: F) -> Complex64 {
    tree_sum_complex_seq(len, f)
}

/// Maximum of `f(i)` over `0..len` (0.0 for an empty range). Order-independent.
pub fn max_seq<F: Fn(usize) -> f64>(len: usize, f: F) -> f64 {
    (0..len).map(f).fold(0.0, f64::max)
}

#[cfg(feature = "parallel")]
pub fn max<F: Fn(usize) -> f64 + Sync + Send>(len: usize, f: F) -> f64 {
    use rayon::prelude::*;
    (0..len).into_par_iter().with_min_len(CHUNK).map(f).reduce(|| 0.0, f64::max)
}

#[cfg(not(feature = "parallel"))]
pub fn max<F: Fn(usize) -> f64 + Sync + Send>(len: usize, f: F) -> f64 {
    max_seq(len, f)
}

/// Ordered map over `0..len`.
#[cfg(feature = "parallel")]
pub fn map<T: Send, F: Fn(usize) -> T + Sync + Send>(len: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..len).into_par_iter().with_min_len(256).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Send, F: Fn(usize) -> T + Sync + Send>(len: usize, f: F) -> Vec<T> {
    (0..len).map(f).collect()
}

/// Ordered map over a slice of work items; each item is processed independently.
#[cfg(feature = "parallel")]
pub fn map_items<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_items<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Run `f` on a pool with `threads` workers (0 = all cores).
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(threads: usize, f: F) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(_threads: usize, f: F) -> R {
    f()
}

/// Worker count the current context would use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_sums_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let n = 3 * CHUNK + 17;
        assert_eq!(tree_sum(n, f).to_bits(), tree_sum_seq(n, f).to_bits());
        let g = |i: usize| Complex64::new((i as f64).cos(), (i as f64 * 0.5).sin());
        let a = tree_sum_complex(n, g);
        let b = tree_sum_complex_seq(n, g);
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn thread_count_does_not_change_sums() {
        let f = |i: usize| 1.0 / (1.0 + (i as f64).sqrt());
        let n = 10 * CHUNK + 3;
        let one = with_threads(1, || tree_sum(n, f));
        let many = with_threads(8, || tree_sum(n, f));
        assert_eq!(one.to_bits(), many.to_bits());
    }

    #[test]
    fn empty_ranges() {
        assert_eq!(tree_sum(0, |_| 1.0), 0.0);
        assert_eq!(max(0, |_| 1.0), 0.0);
    }
}
