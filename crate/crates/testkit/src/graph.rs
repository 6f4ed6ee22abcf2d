//! Transitive closure by repeated squaring of a boolean adjacency matrix.

/// `reach[x][y]` is true when a non-empty path leads from x to y along
/// `edges` (child, parent).
pub fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a][b] = true;
    }
    loop {
        let mut next = m.clone();
        for i in 0..n {
            for k in 0..n {
                if !m[i][k] {
                    continue;
                }
                for j in 0..n {
                    if m[k][j] {
                        next[i][j] = true;
                    }
                }
            }
        }
        if next == m {
            return m;
        }
        m = next;
    }
}

/// Ancestor index sets (start node excluded) for every node.
pub fn ancestor_sets(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let reach = transitive_closure(n, edges);
    (0..n).map(|x| (0..n).filter(|&y| y != x && reach[x][y]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_diamond() {
        assert_eq!(ancestor_sets(3, &[(0, 1), (1, 2)]), vec![vec![1, 2], vec![2], vec![]]);
        let d = ancestor_sets(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(d[0], [1, 2, 3]);
        assert_eq!(ancestor_sets(2, &[(0, 1), (1, 0)]), vec![vec![1], vec![0]]);
    }
}
