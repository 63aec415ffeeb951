use crate::error::{Error, Result};
use crate::extraction::ClusterLabels;
use crate::graph_store::DynamicGraph;

use super::cost::{cost, CostBreakdown};

pub const BRUTE_FORCE_MAX_NODES: usize = 10;

/// Exact optimum by enumerating every set partition (restricted growth
/// strings). Ties resolve to the first partition in enumeration order.
pub fn brute_force_opt(g: &DynamicGraph) -> Result<(ClusterLabels, CostBreakdown)> {
    let nodes = g.sorted_nodes();
    let n = nodes.len();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge { max: BRUTE_FORCE_MAX_NODES, got: n });
    }
    let mut adj = vec![0u16; n];
    for (i, &u) in nodes.iter().enumerate() {
        for (j, &v) in nodes.iter().enumerate() {
            if g.has_edge(u, v)? {
                adj[i] |= 1 << j;
            }
        }
    }
    let pair_cost = |rgs: &[usize]| -> u64 {
        let mut c = 0;
        for i in 0..n {
            for j in i + 1..n {
                let edge = adj[i] >> j & 1 == 1;
                if edge != (rgs[i] == rgs[j]) {
                    c += 1;
                }
            }
        }
        c
    };

    let mut best = vec![0usize; n];
    let mut best_cost = u64::MAX;
    for_each_partition(n, |rgs| {
        let c = pair_cost(rgs);
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(rgs);
        }
    });
    let labels = ClusterLabels::from_pairs(nodes.iter().copied().zip(best));
    let breakdown = cost(g, &labels)?;
    debug_assert!(n == 0 || breakdown.total == best_cost);
    Ok((labels, breakdown))
}

/// Calls `f` once per set partition of `0..n`, as a restricted growth string.
fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    let mut rgs = vec![0usize; n];
    // prefix_max[i] = max(rgs[..i])
    let mut prefix_max = vec![0usize; n];
    f(&rgs);
    let mut i = n;
    while i > 1 {
        i -= 1;
        if rgs[i] > prefix_max[i] {
            continue;
        }
        rgs[i] += 1;
        for j in i + 1..n {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[j - 1].max(rgs[j - 1]);
        }
        f(&rgs);
        i = n;
    }
}
