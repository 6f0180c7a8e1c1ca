//! Binomials and lexicographic enumeration of index sets.

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// All `k`-subsets of `0..n` as increasing index lists, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // rightmost position that can still move
        let Some(i) = (0..k).rev().find(|&i| current[i] < n - k + i) else {
            break;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
    out
}

/// Position of an increasing index list among `combinations(n, k)`.
pub fn lex_rank(n: usize, indices: &[usize]) -> usize {
    let k = indices.len();
    let mut rank = 0;
    let mut next = 0;
    for (pos, &c) in indices.iter().enumerate() {
        for skipped in next..c {
            rank += binomial(n - 1 - skipped, k - 1 - pos);
        }
        next = c + 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn lex_rank_matches_enumeration() {
        for n in 0..8 {
            for k in 0..=n {
                let combos = combinations(n, k);
                assert_eq!(combos.len(), binomial(n, k));
                for (i, c) in combos.iter().enumerate() {
                    assert_eq!(lex_rank(n, c), i);
                }
            }
        }
    }
}
