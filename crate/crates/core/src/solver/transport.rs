use super::CostMatrix;

/// Integer flow on the scaled transportation problem: every row ships `n`
/// units and every column receives `m` units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerFlow {
    pub rows: usize,
    pub cols: usize,
    pub flow: Vec<u64>,
}

impl IntegerFlow {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.flow[i * self.cols + j]
    }

    /// `sum f_ij * c_ij`, accumulated in row-major order.
    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        let mut total = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let f = self.get(i, j);
                if f > 0 {
                    total += f as f64 * cost.get(i, j);
                }
            }
        }
        total
    }
}

/// Coupling with row sums `1/m` and column sums `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    pub mass: Vec<f64>,
}

impl TransportPlan {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.cols).map(|j| self.get(i, j)).sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j)).sum()
    }
}

/// Exact min-cost flow for the uniform-marginal transportation problem,
/// scaled by `m * n` so that supplies and demands are integers.
///
/// Successive shortest augmenting paths with node potentials; each round
/// runs a dense Dijkstra from every row with remaining supply. Returns the
/// flow and its scaled cost `sum f_ij c_ij`.
pub fn min_cost_flow(cost: &CostMatrix) -> (IntegerFlow, f64) {
    let (m, n) = (cost.rows(), cost.cols());
    let mut flow = vec![0u64; m * n];
    if m == 0 || n == 0 {
        let f = IntegerFlow { rows: m, cols: n, flow };
        return (f, 0.0);
    }

    let mut supply = vec![n as u64; m];
    let mut demand = vec![m as u64; n];
    // Nodes 0..m are rows, m..m+n are columns.
    let nodes = m + n;
    let mut pot = vec![0.0f64; nodes];
    for j in 0..n {
        pot[m + j] = (0..m).map(|i| cost.get(i, j)).fold(f64::INFINITY, f64::min);
    }

    let mut dist = vec![f64::INFINITY; nodes];
    let mut done = vec![false; nodes];
    let mut prev = vec![usize::MAX; nodes];
    let mut remaining = (m * n) as u64;

    while remaining > 0 {
        dist.fill(f64::INFINITY);
        done.fill(false);
        prev.fill(usize::MAX);
        for i in 0..m {
            if supply[i] > 0 {
                dist[i] = 0.0;
            }
        }

        let mut target = usize::MAX;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u >= m && demand[u - m] > 0 {
                target = u;
                break;
            }
            if u < m {
                let i = u;
                for j in 0..n {
                    let v = m + j;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost.get(i, j) + pot[i] - pot[v]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[v] {
                        dist[v] = nd;
                        prev[v] = u;
                    }
                }
            } else {
                let j = u - m;
                for i in 0..m {
                    if done[i] || flow[i * n + j] == 0 {
                        continue;
                    }
                    let rc = (-cost.get(i, j) + pot[u] - pot[i]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[i] {
                        dist[i] = nd;
                        prev[i] = u;
                    }
                }
            }
        }
        // The residual graph always reaches a column with demand left.
        assert!(target != usize::MAX, "transport residual graph disconnected");

        let reach = dist[target];
        for v in 0..nodes {
            pot[v] += dist[v].min(reach);
        }

        let mut bottleneck = demand[target - m];
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u >= m {
                // Backward along a column -> row residual edge.
                bottleneck = bottleneck.min(flow[v * n + (u - m)]);
            }
            v = u;
        }
        bottleneck = bottleneck.min(supply[v]);
        let source = v;

        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u < m {
                flow[u * n + (v - m)] += bottleneck;
            } else {
                flow[v * n + (u - m)] -= bottleneck;
            }
            v = u;
        }
        supply[source] -= bottleneck;
        demand[target - m] -= bottleneck;
        remaining -= bottleneck;
    }

    let f = IntegerFlow { rows: m, cols: n, flow };
    let total = f.cost(cost);
    (f, total)
}

/// Optimal coupling for uniform marginals (row mass `1/m`, column mass
/// `1/n`) and its cost `sum c_ij * cost_ij`.
pub fn solve_transport(cost: &CostMatrix) -> (TransportPlan, f64) {
    let (m, n) = (cost.rows(), cost.cols());
    let (flow, scaled) = min_cost_flow(cost);
    let scale = (m * n) as f64;
    let mass = flow.flow.iter().map(|&f| f as f64 / scale).collect();
    let plan = TransportPlan { rows: m, cols: n, mass };
    let total = if m * n == 0 { 0.0 } else { scaled / scale };
    (plan, total)
}
