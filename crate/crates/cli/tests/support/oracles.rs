//! Reference computations that share no code with the library.

use num_rational::Ratio;

/// All-pairs hop distances by Floyd–Warshall over a directed edge list.
pub fn distances(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<usize>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(a, b) in edges {
        d[a][b] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

/// Walks of exactly `len` hops from `at` to `target`; with `len` equal to
/// the distance these are exactly the geodesics.
fn walks(
    out: &[Vec<usize>],
    at: usize,
    target: usize,
    len: usize,
    path: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
) {
    if len == 0 {
        if at == target {
            found.push(path.clone());
        }
        return;
    }
    for &next in &out[at] {
        path.push(next);
        walks(out, next, target, len - 1, path, found);
        path.pop();
    }
}

/// Betweenness by enumerating every shortest path between every ordered
/// pair of distinct nodes.
pub fn brute_force_betweenness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let d = distances(n, edges);
    let mut out = vec![Vec::new(); n];
    for &(a, b) in edges {
        out[a].push(b);
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            let Some(len) = d[s][t] else { continue };
            if s == t || len < 2 {
                continue;
            }
            let mut found = Vec::new();
            walks(&out, s, t, len, &mut vec![s], &mut found);
            let total = found.len() as f64;
            let mut through = vec![0usize; n];
            for path in &found {
                for &v in &path[1..path.len() - 1] {
                    through[v] += 1;
                }
            }
            for v in 0..n {
                score[v] += through[v] as f64 / total;
            }
        }
    }
    score
}

/// Modularity `(1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)` in exact
/// rational arithmetic over an undirected edge list.
pub fn rational_modularity(n: usize, edges: &[(usize, usize)], cluster: &[usize]) -> Ratio<i64> {
    let mut a = vec![vec![0i64; n]; n];
    for &(u, v) in edges {
        a[u][v] = 1;
        a[v][u] = 1;
    }
    let k: Vec<i64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: i64 = k.iter().sum();
    let mut q = Ratio::from_integer(0);
    for i in 0..n {
        for j in 0..n {
            if cluster[i] == cluster[j] {
                q += Ratio::from_integer(a[i][j]) - Ratio::new(k[i] * k[j], two_m);
            }
        }
    }
    q / Ratio::from_integer(two_m)
}
