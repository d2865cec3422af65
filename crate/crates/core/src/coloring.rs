//! Proper edge colouring of subsets of `K_n`, used to pack CZ gates into
//! parallel layers.

use crate::error::{Result, WirecutError};

/// Schedules the given qubit pairs (1-based) into layers in which no qubit
/// repeats. Uses the circle-method colouring of `K_n` restricted to the
/// requested pairs, then pulls edges into earlier layers where they fit.
/// The layer count never exceeds `n` for odd `n` or `n - 1` for even `n`.
pub fn edge_color_cz(pairs: &[(usize, usize)], n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    let mut wanted = vec![false; n * n];
    for &(a, b) in pairs {
        if a == b || a == 0 || b == 0 || a > n || b > n {
            return Err(WirecutError::invalid(format!(
                "bad qubit pair ({a}, {b}) for n = {n}"
            )));
        }
        let (lo, hi) = (a.min(b) - 1, a.max(b) - 1);
        wanted[lo * n + hi] = true;
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    let big = if n.is_multiple_of(2) { n } else { n + 1 };
    let ring = big - 1;
    let mut layers: Vec<Vec<(usize, usize)>> = (0..ring)
        .map(|r| {
            let mut round = vec![(r, ring)];
            for k in 1..big / 2 {
                round.push(((r + k) % ring, (r + ring - k) % ring));
            }
            let mut edges: Vec<(usize, usize)> = round
                .into_iter()
                .map(|(a, b)| (a.min(b), a.max(b)))
                .filter(|&(a, b)| b < n && wanted[a * n + b])
                .map(|(a, b)| (a + 1, b + 1))
                .collect();
            edges.sort_unstable();
            edges
        })
        .collect();

    for r in 1..layers.len() {
        let edges = std::mem::take(&mut layers[r]);
        let mut keep = Vec::new();
        for e in edges {
            match (0..r).find(|&l| {
                layers[l]
                    .iter()
                    .all(|&(a, b)| a != e.0 && a != e.1 && b != e.0 && b != e.1)
            }) {
                Some(l) => layers[l].push(e),
                None => keep.push(e),
            }
        }
        layers[r] = keep;
    }
    layers.retain(|l| !l.is_empty());
    for l in &mut layers {
        l.sort_unstable();
    }
    Ok(layers)
}

pub fn chromatic_index_complete(n: usize) -> usize {
    match n {
        0 | 1 => 0,
        _ if n.is_multiple_of(2) => n - 1,
        _ => n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_pairs(n: usize) -> Vec<(usize, usize)> {
        (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .collect()
    }

    fn assert_proper(layers: &[Vec<(usize, usize)>], pairs: &[(usize, usize)]) {
        let mut seen = Vec::new();
        for l in layers {
            let mut used = std::collections::HashSet::new();
            for &(a, b) in l {
                assert!(used.insert(a) && used.insert(b));
                seen.push((a, b));
            }
        }
        let mut want: Vec<(usize, usize)> =
            pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        want.sort_unstable();
        want.dedup();
        seen.sort_unstable();
        assert_eq!(seen, want);
    }

    #[test]
    fn complete_graphs() {
        assert_eq!(edge_color_cz(&all_pairs(2), 2).unwrap().len(), 1);
        assert_eq!(edge_color_cz(&all_pairs(3), 3).unwrap().len(), 3);
        assert_eq!(edge_color_cz(&all_pairs(4), 4).unwrap().len(), 3);
        for n in 2..=16 {
            let layers = edge_color_cz(&all_pairs(n), n).unwrap();
            assert_eq!(layers.len(), chromatic_index_complete(n), "n={n}");
            assert_proper(&layers, &all_pairs(n));
        }
    }

    #[test]
    fn empty_and_invalid() {
        assert!(edge_color_cz(&[], 5).unwrap().is_empty());
        assert!(edge_color_cz(&[(1, 1)], 3).is_err());
        assert!(edge_color_cz(&[(0, 2)], 3).is_err());
        assert!(edge_color_cz(&[(1, 4)], 3).is_err());
    }

    #[test]
    fn disjoint_pairs_share_one_layer() {
        let layers = edge_color_cz(&[(1, 2), (3, 4), (5, 6)], 6).unwrap();
        assert_eq!(layers.len(), 1);
    }

    proptest! {
        #[test]
        fn proper_and_bounded(n in 2usize..12, mask in any::<u64>()) {
            let pairs: Vec<(usize, usize)> = all_pairs(n)
                .into_iter()
                .enumerate()
                .filter(|(i, _)| (mask >> (i % 64)) & 1 == 1)
                .map(|(_, p)| p)
                .collect();
            let layers = edge_color_cz(&pairs, n).unwrap();
            assert_proper(&layers, &pairs);
            prop_assert!(layers.len() <= chromatic_index_complete(n));
        }
    }
}
