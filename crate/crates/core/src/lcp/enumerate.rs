use alloc::vec::Vec;

use super::{selected_polyhedron, Bounds, ComplementaritySet, Encoding, LcpError, SetLp};
use crate::budget::{Budget, Unlimited};
use crate::lp::Polyhedron;

/// Largest pair count accepted by [`enumerate_pieces`] (2^24 encodings).
pub const DEFAULT_PIECE_CAP_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub encoding: Encoding,
    pub polyhedron: Polyhedron,
}

/// All nonempty pieces in lexicographic encoding order.
pub fn enumerate_pieces(s: &ComplementaritySet) -> Result<Vec<Piece>, LcpError> {
    enumerate_pieces_with(s, DEFAULT_PIECE_CAP_BITS, &Unlimited)
}

pub fn enumerate_pieces_with(
    s: &ComplementaritySet,
    cap_bits: usize,
    budget: &dyn Budget,
) -> Result<Vec<Piece>, LcpError> {
    nonempty_encodings(s, cap_bits, budget)?
        .into_iter()
        .map(|e| {
            let polyhedron = selected_polyhedron(s, &e)?;
            Ok(Piece { encoding: e, polyhedron })
        })
        .collect()
}

/// Depth-first walk over partial encodings, 0-side first, pruning any prefix
/// whose pinned relaxation is already empty.
pub(crate) fn nonempty_encodings(
    s: &ComplementaritySet,
    cap_bits: usize,
    budget: &dyn Budget,
) -> Result<Vec<Encoding>, LcpError> {
    s.validate()?;
    if s.pairs() > cap_bits {
        return Err(LcpError::TooManyComplementarities { count: s.pairs(), cap: 1usize << cap_bits.min(63) });
    }
    let lp = s.lp_form();
    let root = lp.base();
    let mut out = Vec::new();
    if !lp.feasible(&root)? {
        return Ok(out);
    }
    let mut prefix = Vec::with_capacity(s.pairs());
    let mut solves = 0usize;
    walk(&lp, root, &mut prefix, s.pairs(), &mut out, &mut solves, budget)?;
    Ok(out)
}

fn walk(
    lp: &SetLp,
    bounds: Bounds,
    prefix: &mut Vec<bool>,
    depth: usize,
    out: &mut Vec<Encoding>,
    solves: &mut usize,
    budget: &dyn Budget,
) -> Result<(), LcpError> {
    let i = prefix.len();
    if i == depth {
        out.push(Encoding(prefix.clone()));
        return Ok(());
    }
    for bit in [false, true] {
        let mut child = bounds.clone();
        lp.pin(&mut child, i, bit);
        *solves += 1;
        if *solves % 256 == 0 && budget.expired() {
            return Err(LcpError::TimeLimit);
        }
        if lp.feasible(&child)? {
            prefix.push(bit);
            walk(lp, child, prefix, depth, out, solves, budget)?;
            prefix.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_piece_when_other_side_never_binds() {
        // 0 ≤ x ⊥ x + 1 ≥ 0 forces x = 0
        let mut s = ComplementaritySet::free(1);
        s.pair(0, &[1.0], 1.0);
        let pieces = enumerate_pieces(&s).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].encoding, Encoding(alloc::vec![false]));
    }

    #[test]
    fn lexicographic_order_and_cap() {
        // two independent unit-interval pairs: four point pieces
        let mut s = ComplementaritySet::free(2);
        s.pair(0, &[-1.0, 0.0], 1.0);
        s.pair(1, &[0.0, -1.0], 1.0);
        let codes: Vec<_> = enumerate_pieces(&s).unwrap().into_iter().map(|p| p.encoding).collect();
        let expect: Vec<_> = [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|b| Encoding::from_bits(b)).collect();
        assert_eq!(codes, expect);
        assert!(matches!(
            enumerate_pieces_with(&s, 1, &Unlimited),
            Err(LcpError::TooManyComplementarities { count: 2, .. })
        ));
    }
}
