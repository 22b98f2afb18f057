use std::collections::VecDeque;

use super::generators::{GeneratorSet, Token};
use super::GroupError;

/// Orders above this are associativity-checked on a deterministic sample.
const EXHAUSTIVE_ASSOC_ORDER: usize = 128;
const SAMPLED_ASSOC_TRIPLES: u64 = 1 << 20;

/// A finite group given by its multiplication table, with a symmetric
/// generating subset and precomputed Cayley-graph geodesics.
#[derive(Clone, Debug)]
pub struct FiniteTable {
    order: usize,
    table: Vec<u32>,
    identity: u32,
    inverse: Vec<u32>,
    token_elems: Vec<u32>,
    dist: Vec<u32>,
    geodesic: Vec<Vec<Token>>,
}

impl FiniteTable {
    /// Validates `table` and `generators` and builds the token set.
    ///
    /// Generators are element indices; every non-involutive generator must
    /// have its inverse in the list as well.
    pub fn new(
        table: &[Vec<u32>],
        generators: &[u32],
    ) -> Result<(FiniteTable, GeneratorSet), GroupError> {
        let order = table.len();
        if order == 0 {
            return Err(GroupError::InvalidTable("empty table".into()));
        }
        let mut flat = Vec::with_capacity(order * order);
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(GroupError::InvalidTable(format!(
                    "row {i} has {} entries, expected {order}",
                    row.len()
                )));
            }
            for &x in row {
                if x as usize >= order {
                    return Err(GroupError::InvalidTable(format!(
                        "entry {x} in row {i} is out of range"
                    )));
                }
            }
            flat.extend_from_slice(row);
        }
        let mul = |a: u32, b: u32| flat[a as usize * order + b as usize];

        // Latin square: every row and column is a permutation.
        for a in 0..order {
            let mut seen_row = vec![false; order];
            let mut seen_col = vec![false; order];
            for b in 0..order {
                seen_row[flat[a * order + b] as usize] = true;
                seen_col[flat[b * order + a] as usize] = true;
            }
            if seen_row.iter().chain(&seen_col).any(|s| !s) {
                return Err(GroupError::InvalidTable(format!(
                    "row or column {a} is not a permutation"
                )));
            }
        }

        let identity = (0..order as u32)
            .find(|&e| (0..order as u32).all(|x| mul(e, x) == x && mul(x, e) == x))
            .ok_or_else(|| GroupError::InvalidTable("no identity element".into()))?;

        if order <= EXHAUSTIVE_ASSOC_ORDER {
            for a in 0..order as u32 {
                for b in 0..order as u32 {
                    let ab = mul(a, b);
                    for c in 0..order as u32 {
                        if mul(ab, c) != mul(a, mul(b, c)) {
                            return Err(GroupError::NotAssociative(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut state = 0x9E37_79B9_7F4A_7C15u64;
            for _ in 0..SAMPLED_ASSOC_TRIPLES {
                let mut pick = || {
                    state = crate::rng::splitmix64(state);
                    (state % order as u64) as u32
                };
                let (a, b, c) = (pick(), pick(), pick());
                if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                    return Err(GroupError::NotAssociative(a, b, c));
                }
            }
        }

        let inverse: Vec<u32> = (0..order as u32)
            .map(|a| {
                (0..order as u32)
                    .find(|&b| mul(a, b) == identity)
                    .expect("latin square has inverses")
            })
            .collect();

        // Pair the generators up.
        let mut involutive = Vec::new();
        let mut token_elems = Vec::new();
        let mut assigned = vec![false; generators.len()];
        for (i, &g) in generators.iter().enumerate() {
            if g as usize >= order {
                return Err(GroupError::InvalidGenerator(format!(
                    "generator {g} is not an element of a group of order {order}"
                )));
            }
            if g == identity {
                return Err(GroupError::InvalidGenerator(
                    "the identity cannot be a generator".into(),
                ));
            }
            if generators[..i].contains(&g) {
                return Err(GroupError::InvalidGenerator(format!(
                    "generator {g} listed twice"
                )));
            }
            if assigned[i] {
                continue;
            }
            assigned[i] = true;
            let gi = inverse[g as usize];
            if gi == g {
                involutive.push(true);
                token_elems.push(g);
            } else {
                let j = generators.iter().position(|&h| h == gi).ok_or_else(|| {
                    GroupError::InvalidGenerator(format!(
                        "generating set is not symmetric: inverse {gi} of {g} is missing"
                    ))
                })?;
                assigned[j] = true;
                involutive.push(false);
                token_elems.push(g);
                token_elems.push(gi);
            }
        }
        let gens = GeneratorSet::from_pairs(&involutive);

        // BFS on the right Cayley graph from the identity.
        let mut dist = vec![u32::MAX; order];
        let mut geodesic: Vec<Vec<Token>> = vec![Vec::new(); order];
        dist[identity as usize] = 0;
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for t in gens.tokens() {
                let y = mul(x, token_elems[t.index()]);
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = dist[x as usize] + 1;
                    let mut w = geodesic[x as usize].clone();
                    w.push(t);
                    geodesic[y as usize] = w;
                    queue.push_back(y);
                }
            }
        }
        if let Some(missing) = dist.iter().position(|&d| d == u32::MAX) {
            return Err(GroupError::NotGenerating(missing as u32));
        }

        Ok((
            FiniteTable {
                order,
                table: flat,
                identity,
                inverse,
                token_elems,
                dist,
                geodesic,
            },
            gens,
        ))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.order + b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    pub fn token_element(&self, t: Token) -> u32 {
        self.token_elems[t.index()]
    }

    pub fn dist(&self, a: u32) -> u32 {
        self.dist[a as usize]
    }

    /// A shortest token word spelling `a`.
    pub fn geodesic(&self, a: u32) -> &[Token] {
        &self.geodesic[a as usize]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }
}

/// Multiplication table of the cyclic group `Z/n`.
pub fn cyclic_table(n: usize) -> Vec<Vec<u32>> {
    (0..n)
        .map(|a| (0..n).map(|b| ((a + b) % n) as u32).collect())
        .collect()
}

/// Multiplication table of `Z/p x Z/q` with element `(i, j)` stored at `i*q + j`.
pub fn product_cyclic_table(p: usize, q: usize) -> Vec<Vec<u32>> {
    let n = p * q;
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let (ai, aj) = (a / q, a % q);
                    let (bi, bj) = (b / q, b % q);
                    (((ai + bi) % p) * q + (aj + bj) % q) as u32
                })
                .collect()
        })
        .collect()
}

/// Multiplication table of the symmetric group `S_3`, elements as
/// permutations of `{0,1,2}` in lexicographic order, composed as `(a*b)(i) = a(b(i))`.
pub fn s3_table() -> Vec<Vec<u32>> {
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap() as u32;
    perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| index([a[b[0]], a[b[1]], a[b[2]]]))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z4_builds_with_pairs() {
        let (t, gens) = FiniteTable::new(&cyclic_table(4), &[1, 3]).unwrap();
        assert_eq!(gens.len(), 2);
        assert_eq!(t.identity(), 0);
        assert_eq!(t.inv(1), 3);
        assert_eq!(t.dist(3), 1);
        assert_eq!(t.dist(2), 2);
    }

    #[test]
    fn klein_four_has_involutive_generators() {
        let (_, gens) = FiniteTable::new(&product_cyclic_table(2, 2), &[1, 2, 3]).unwrap();
        assert_eq!(gens.len(), 3);
        assert!(gens.tokens().all(|t| gens.is_involutive(t)));
    }

    #[test]
    fn rejects_asymmetric_set() {
        let err = FiniteTable::new(&cyclic_table(5), &[1]).unwrap_err();
        assert!(matches!(err, GroupError::InvalidGenerator(_)));
    }

    #[test]
    fn rejects_non_generating_set() {
        let err = FiniteTable::new(&cyclic_table(4), &[2]).unwrap_err();
        assert!(matches!(err, GroupError::NotGenerating(_)));
    }

    #[test]
    fn rejects_identity_and_bad_tables() {
        assert!(FiniteTable::new(&cyclic_table(4), &[0, 1, 3]).is_err());
        let bad = vec![vec![0, 1], vec![0, 1]];
        assert!(FiniteTable::new(&bad, &[1]).is_err());
        let ragged = vec![vec![0, 1], vec![1]];
        assert!(FiniteTable::new(&ragged, &[1]).is_err());
    }

    #[test]
    fn s3_is_a_group() {
        let (t, gens) = FiniteTable::new(&s3_table(), &[1, 2]).unwrap();
        assert_eq!(t.order(), 6);
        assert_eq!(gens.len(), 2);
        assert_eq!((0..6).map(|a| t.dist(a)).max(), Some(3));
    }
}
