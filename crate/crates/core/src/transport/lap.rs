//! Dense linear assignment solver (Jonker–Volgenant).
//!
//! Column reduction, reduction transfer and two passes of augmenting row
//! reduction build a partial assignment with feasible column prices; each
//! remaining free row is then routed along a shortest augmenting path
//! (Dijkstra over reduced costs). The result is an exact primal optimum.

const UNASSIGNED: usize = usize::MAX;

/// Solves `min Σ_i cost[i][perm[i]]` over permutations.
///
/// `cost` is row-major `n × n` and must be finite. Returns `perm`, the column
/// assigned to each row.
pub fn solve(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    debug_assert!(cost.iter().all(|c| c.is_finite()));
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }
    let c = |i: usize, j: usize| cost[i * n + j];

    let mut row_sol = vec![UNASSIGNED; n];
    let mut col_sol = vec![UNASSIGNED; n];
    let mut v = vec![0.0f64; n];

    // Column reduction: each column goes to its cheapest row if that row is
    // still unmatched (ties favour the cheaper column price).
    let mut matches = vec![0u32; n];
    for j in (0..n).rev() {
        let mut imin = 0;
        let mut min = c(0, j);
        for i in 1..n {
            let h = c(i, j);
            if h < min {
                min = h;
                imin = i;
            }
        }
        v[j] = min;
        matches[imin] += 1;
        if matches[imin] == 1 {
            row_sol[imin] = j;
            col_sol[j] = imin;
        } else if v[j] < v[row_sol[imin]] {
            let j1 = row_sol[imin];
            row_sol[imin] = j;
            col_sol[j] = imin;
            col_sol[j1] = UNASSIGNED;
        } else {
            col_sol[j] = UNASSIGNED;
        }
    }

    // Reduction transfer from rows matched exactly once.
    let mut free = Vec::with_capacity(n);
    for i in 0..n {
        match matches[i] {
            0 => free.push(i),
            1 => {
                let j1 = row_sol[i];
                let mut min = f64::INFINITY;
                for j in 0..n {
                    if j != j1 {
                        let h = c(i, j) - v[j];
                        if h < min {
                            min = h;
                        }
                    }
                }
                v[j1] -= min;
            }
            _ => {}
        }
    }

    // Augmenting row reduction.
    for _ in 0..2 {
        if free.is_empty() {
            break;
        }
        free = augmenting_row_reduction(&c, n, free, &mut row_sol, &mut col_sol, &mut v);
    }

    // Shortest augmenting paths for whatever is still free.
    let mut d = vec![0.0f64; n];
    let mut pred = vec![0usize; n];
    let mut cols: Vec<usize> = (0..n).collect();
    for &free_row in &free {
        for j in 0..n {
            d[j] = c(free_row, j) - v[j];
            pred[j] = free_row;
            cols[j] = j;
        }
        // cols[..low]: scanned; cols[low..up]: at current minimum, to scan;
        // cols[up..]: not yet reached.
        let mut low = 0;
        let mut up = 0;
        let mut scanned = 0;
        let mut min = 0.0;
        let end_of_path;
        'search: loop {
            if up == low {
                scanned = low;
                min = d[cols[up]];
                up += 1;
                for k in up..n {
                    let j = cols[k];
                    let h = d[j];
                    if h <= min {
                        if h < min {
                            up = low;
                            min = h;
                        }
                        cols[k] = cols[up];
                        cols[up] = j;
                        up += 1;
                    }
                }
                for &j in &cols[low..up] {
                    if col_sol[j] == UNASSIGNED {
                        end_of_path = j;
                        break 'search;
                    }
                }
            }

            let j1 = cols[low];
            low += 1;
            let i = col_sol[j1];
            let h = c(i, j1) - v[j1] - min;
            for k in up..n {
                let j = cols[k];
                let v2 = c(i, j) - v[j] - h;
                if v2 < d[j] {
                    pred[j] = i;
                    if v2 <= min {
                        if col_sol[j] == UNASSIGNED {
                            end_of_path = j;
                            break 'search;
                        }
                        cols[k] = cols[up];
                        cols[up] = j;
                        up += 1;
                    }
                    d[j] = v2;
                }
            }
        }

        for &j in &cols[..scanned] {
            v[j] += d[j] - min;
        }

        let mut j = end_of_path;
        loop {
            let i = pred[j];
            col_sol[j] = i;
            let next = row_sol[i];
            row_sol[i] = j;
            if i == free_row {
                break;
            }
            j = next;
        }
    }

    row_sol
}

/// One pass of augmenting row reduction. Returns the rows left free.
fn augmenting_row_reduction(
    c: &impl Fn(usize, usize) -> f64,
    n: usize,
    mut queue: Vec<usize>,
    row_sol: &mut [usize],
    col_sol: &mut [usize],
    v: &mut [f64],
) -> Vec<usize> {
    let mut next_free = Vec::new();
    let mut k = 0;
    // Bounds immediate re-processing; in exact arithmetic the loop is finite,
    // with floating-point ties it can crawl by one ulp at a time.
    let mut budget = 16 * n;
    while k < queue.len() {
        let i = queue[k];
        k += 1;

        let mut umin = c(i, 0) - v[0];
        let mut j1 = 0;
        let mut usubmin = f64::INFINITY;
        let mut j2 = 0;
        for j in 1..n {
            let h = c(i, j) - v[j];
            if h < usubmin {
                if h >= umin {
                    usubmin = h;
                    j2 = j;
                } else {
                    usubmin = umin;
                    umin = h;
                    j2 = j1;
                    j1 = j;
                }
            }
        }

        let mut i0 = col_sol[j1];
        let strict = umin < usubmin;
        if strict {
            v[j1] -= usubmin - umin;
        } else if i0 != UNASSIGNED {
            j1 = j2;
            i0 = col_sol[j2];
        }
        row_sol[i] = j1;
        col_sol[j1] = i;

        if i0 != UNASSIGNED {
            row_sol[i0] = UNASSIGNED;
            if strict && budget > 0 {
                budget -= 1;
                k -= 1;
                queue[k] = i0;
            } else {
                next_free.push(i0);
            }
        }
    }
    next_free
}
