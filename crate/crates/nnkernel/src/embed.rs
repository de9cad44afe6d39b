//! Embedding lookup.

use crate::{KernelError, Result, Scalar, SeqLayout, Tensor};

/// Looks up `ids` (`[B × n_max]`, valid where `t < lengths[b]`) in `table`
/// (`[V × E]`), writing `[B × E × n_max]` with zeros at padded positions.
pub fn embed_batch<T: Scalar>(
    ids: &[u32],
    table: &[T],
    vocab: usize,
    dim: usize,
    layout: SeqLayout<'_>,
    out: &mut [T],
) -> Result<()> {
    check_ids(ids, vocab, &layout)?;
    if table.len() != vocab * dim {
        return Err(KernelError::shape("embedding table", vocab * dim, table.len()));
    }
    layout.check("embedding output", out.len())?;
    out.iter_mut().for_each(|x| *x = T::zero());
    let n_max = layout.n_max;
    for (b, &len) in layout.lengths.iter().enumerate() {
        for t in 0..len {
            let id = ids[b * n_max + t] as usize;
            for f in 0..dim {
                out[layout.row(b, f) + t] = table[id * dim + f];
            }
        }
    }
    Ok(())
}

/// Scatter-adds the output gradient into the table gradient.
pub fn embed_backward_batch<T: Scalar>(
    ids: &[u32],
    grad_out: &[T],
    dim: usize,
    layout: SeqLayout<'_>,
    grad_table: &mut [T],
) -> Result<()> {
    layout.check("embedding output gradient", grad_out.len())?;
    let vocab = grad_table.len() / dim.max(1);
    check_ids(ids, vocab, &layout)?;
    let n_max = layout.n_max;
    for (b, &len) in layout.lengths.iter().enumerate() {
        for t in 0..len {
            let id = ids[b * n_max + t] as usize;
            for f in 0..dim {
                grad_table[id * dim + f] += grad_out[layout.row(b, f) + t];
            }
        }
    }
    Ok(())
}

fn check_ids(ids: &[u32], vocab: usize, layout: &SeqLayout<'_>) -> Result<()> {
    let n_max = layout.n_max;
    if ids.len() != layout.batch() * n_max {
        return Err(KernelError::shape("id matrix", layout.batch() * n_max, ids.len()));
    }
    for (b, &len) in layout.lengths.iter().enumerate() {
        if let Some(&bad) = ids[b * n_max..b * n_max + len].iter().find(|&&id| id as usize >= vocab) {
            return Err(KernelError::invalid(format!("id {bad} out of range for vocabulary of {vocab}")));
        }
    }
    Ok(())
}

/// Single-sequence lookup: `ids` of length n, `table [V × E]` → `[E × n]`.
pub fn embed_lookup<T: Scalar>(ids: &[u32], table: &Tensor<T>) -> Result<Tensor<T>> {
    table.expect_rank("embedding table", 2)?;
    if ids.is_empty() {
        return Err(KernelError::invalid("empty id sequence"));
    }
    let (v, e) = (table.shape()[0], table.shape()[1]);
    let n = ids.len();
    let lengths = [n];
    let mut out = vec![T::zero(); e * n];
    embed_batch(ids, table.data(), v, e, SeqLayout::new(e, n, &lengths), &mut out)?;
    Tensor::from_vec(out, vec![e, n])
}
