//! Data-parallel helpers.
//!
//! With the `parallel` feature the maps run on the rayon pool, otherwise they
//! fall back to plain iterators. Every reduction here is order-fixed: maps
//! collect in index order and maxima break ties toward the lowest index, so
//! results are bit-identical for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every index in `0..len`, collecting in index order.
pub fn map_indices<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Applies `f` to every item, collecting in input order.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Index and value of the largest entry; ties go to the lowest index and NaN
/// entries are skipped. Returns `None` for an empty (or all-NaN) slice.
pub fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Maximum of `f` over `0..len` with lowest-index tie breaking.
pub fn max_by_index<F>(len: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let values = map_indices(len, f);
    argmax(&values)
}

/// Sums per-chunk partial results in a fixed order. The chunking depends only
/// on `len` and `chunk`, never on the thread count.
pub fn chunked_sum<R, F, G>(len: usize, chunk: usize, partial: F, combine: G) -> Option<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
    G: FnMut(R, R) -> R,
{
    let chunk = chunk.max(1);
    let chunks = len.div_ceil(chunk);
    let parts = map_indices(chunks, |c| partial(c * chunk..((c + 1) * chunk).min(len)));
    let mut iter = parts.into_iter();
    let first = iter.next()?;
    Some(iter.fold(first, combine))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some((1, 3.0)));
        assert_eq!(argmax(&[]), None);
        assert_eq!(argmax(&[f64::NAN, 0.5]), Some((1, 0.5)));
    }

    #[test]
    fn chunked_sum_matches_serial() {
        let total = chunked_sum(
            1000,
            64,
            |r| r.map(|i| i as f64 * 0.1).sum::<f64>(),
            |a, b| a + b,
        );
        let serial: f64 = (0..1000).map(|i| i as f64 * 0.1).sum();
        assert!((total.unwrap() - serial).abs() < 1e-9);
    }
}
