//! Partition of chunk rows by the values of the selected base bits.
//!
//! Rows live in one permutation buffer; each leaf is a contiguous range of
//! it with members kept in ascending row order. Adding a bit stably splits
//! every leaf in one pass over the rows. Each addition logs which leaves it
//! split so the last addition can be undone by merging those ranges back.

use crate::bitmatrix::QuantizedMatrix;
use crate::error::{GdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Span {
    start: u32,
    len: u32,
}

#[derive(Debug, Clone)]
pub struct BaseTree<'a> {
    matrix: &'a QuantizedMatrix,
    selected: Vec<usize>,
    in_selection: Vec<bool>,
    order: Vec<u32>,
    leaves: Vec<Span>,
    spare: Vec<Span>,
    // per addition: indices (after the split) of the leaves holding the 1-halves
    undo: Vec<Vec<u32>>,
    scratch: Vec<u32>,
}

/// One base: its masked column values and the rows that share it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf<'t> {
    /// Column values with every non-selected bit cleared.
    pub base: Vec<u64>,
    pub members: &'t [u32],
}

impl<'a> BaseTree<'a> {
    pub fn new(matrix: &'a QuantizedMatrix) -> Self {
        let n = matrix.n();
        BaseTree {
            matrix,
            selected: Vec::new(),
            in_selection: vec![false; matrix.chunk_width()],
            order: (0..n as u32).collect(),
            leaves: vec![Span {
                start: 0,
                len: n as u32,
            }],
            spare: Vec::new(),
            undo: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn matrix(&self) -> &'a QuantizedMatrix {
        self.matrix
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Selected positions in insertion order.
    pub fn selected_bits(&self) -> &[usize] {
        &self.selected
    }

    pub fn is_selected(&self, position: usize) -> bool {
        self.in_selection.get(position).copied().unwrap_or(false)
    }

    /// Splits every leaf by the value of `position` and returns the new
    /// leaf count.
    pub fn add_bit(&mut self, position: usize) -> Result<usize> {
        let width = self.matrix.chunk_width();
        if position >= width {
            return Err(GdError::BitOutOfRange { position, width });
        }
        if self.in_selection[position] {
            return Err(GdError::DuplicateBit(position));
        }
        let (c, shift) = self.matrix.locate(position);
        let col = self.matrix.column(c);

        let mut next = std::mem::take(&mut self.spare);
        next.clear();
        next.reserve(self.leaves.len());
        let mut splits = Vec::new();
        for &leaf in &self.leaves {
            if leaf.len == 1 {
                next.push(leaf);
                continue;
            }
            let range = leaf.start as usize..(leaf.start + leaf.len) as usize;
            let members = &mut self.order[range];
            self.scratch.clear();
            let mut zeros = 0usize;
            for i in 0..members.len() {
                let r = members[i];
                if (col[r as usize] >> shift) & 1 == 1 {
                    self.scratch.push(r);
                } else {
                    members[zeros] = r;
                    zeros += 1;
                }
            }
            if zeros == 0 || zeros == members.len() {
                // all-ones leaves were never written; all-zeros were rewritten in place
                next.push(leaf);
            } else {
                members[zeros..].copy_from_slice(&self.scratch);
                next.push(Span {
                    start: leaf.start,
                    len: zeros as u32,
                });
                splits.push(next.len() as u32);
                next.push(Span {
                    start: leaf.start + zeros as u32,
                    len: leaf.len - zeros as u32,
                });
            }
        }
        self.spare = std::mem::replace(&mut self.leaves, next);
        self.undo.push(splits);
        self.selected.push(position);
        self.in_selection[position] = true;
        Ok(self.leaves.len())
    }

    /// Reverts the most recent [`add_bit`](Self::add_bit).
    pub fn remove_last_bit(&mut self) -> Result<usize> {
        let position = self.selected.pop().ok_or(GdError::EmptySelection)?;
        self.in_selection[position] = false;
        let splits = self.undo.pop().expect("undo log tracks selection");

        let mut merged = std::mem::take(&mut self.spare);
        merged.clear();
        merged.reserve(self.leaves.len() - splits.len());
        let mut pending = splits.iter().peekable();
        for (i, &leaf) in self.leaves.iter().enumerate() {
            if pending.peek().is_some_and(|&&s| s as usize == i) {
                pending.next();
                let left = merged.pop().expect("split leaf has a left half");
                merge_runs(&mut self.order, &mut self.scratch, left, leaf);
                merged.push(Span {
                    start: left.start,
                    len: left.len + leaf.len,
                });
            } else {
                merged.push(leaf);
            }
        }
        self.spare = std::mem::replace(&mut self.leaves, merged);
        Ok(self.leaves.len())
    }

    /// Per-column masks of the selected bits.
    pub fn base_masks(&self) -> Vec<u64> {
        self.matrix.column_masks(self.selected.iter().copied())
    }

    /// Leaves ordered lexicographically by base value, members ascending.
    pub fn leaves(&self) -> Vec<Leaf<'_>> {
        let masks = self.base_masks();
        let mut out: Vec<Leaf<'_>> = self
            .leaves
            .iter()
            .map(|s| {
                let members = &self.order[s.start as usize..(s.start + s.len) as usize];
                let first = members[0] as usize;
                let base = masks
                    .iter()
                    .enumerate()
                    .map(|(c, m)| self.matrix.value(first, c) & m)
                    .collect();
                Leaf { base, members }
            })
            .collect();
        out.sort_by(|a, b| a.base.cmp(&b.base));
        out
    }

    /// Leaf index of every row, following the ordering of [`leaves`](Self::leaves).
    pub fn row_assignments(&self) -> (Vec<Leaf<'_>>, Vec<u32>) {
        let leaves = self.leaves();
        let mut ids = vec![0u32; self.matrix.n()];
        for (j, leaf) in leaves.iter().enumerate() {
            for &r in leaf.members {
                ids[r as usize] = j as u32;
            }
        }
        (leaves, ids)
    }
}

// Merges two adjacent ascending runs back into one ascending run.
fn merge_runs(order: &mut [u32], scratch: &mut Vec<u32>, left: Span, right: Span) {
    let start = left.start as usize;
    let mid = start + left.len as usize;
    let end = mid + right.len as usize;
    scratch.clear();
    scratch.extend_from_slice(&order[start..mid]);
    let (mut i, mut j, mut k) = (0usize, mid, start);
    while i < scratch.len() && j < end {
        if scratch[i] < order[j] {
            order[k] = scratch[i];
            i += 1;
        } else {
            order[k] = order[j];
            j += 1;
        }
        k += 1;
    }
    while i < scratch.len() {
        order[k] = scratch[i];
        i += 1;
        k += 1;
    }
}
