//! Batched matrix products with deterministic parallelism.
//!
//! Row blocks have a fixed size, so every output element is produced by
//! the same sequential kernel call regardless of how many workers run;
//! results are bit-identical for any thread count.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

/// Fixed row-block size for parallel products.
const ROW_BLOCK: usize = 64;

/// `a . b` with the rows of `a` processed in fixed-size parallel blocks.
pub fn par_matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let (rows, inner) = a.dim();
    let cols = b.ncols();
    debug_assert_eq!(inner, b.nrows());
    let mut out = Array2::<f64>::zeros((rows, cols));
    if rows <= ROW_BLOCK {
        out.assign(&a.dot(&b));
        return out;
    }
    out.axis_chunks_iter_mut(Axis(0), ROW_BLOCK)
        .into_par_iter()
        .zip(a.axis_chunks_iter(Axis(0), ROW_BLOCK).into_par_iter())
        .for_each(|(mut out_block, a_block)| {
            out_block.assign(&a_block.dot(&b));
        });
    out
}
