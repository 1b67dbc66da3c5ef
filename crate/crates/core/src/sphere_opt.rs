//! Suprema of functions on S²: a node scan followed by an optional local
//! compass-search polish in a tangent chart (no pole singularity).

use crate::exec;
use crate::group_rep::{CosetPoint, EvalGrid};

#[derive(Debug, Clone, Copy)]
pub struct SupResult {
    pub value: f64,
    pub point: CosetPoint,
    /// Node index of the best grid node (before polishing).
    pub node: usize,
}

/// Local refinement applied after the node scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polish {
    /// Number of best nodes to refine from (0 disables polishing).
    pub starts: usize,
    pub min_step: f64,
}

impl Polish {
    pub const OFF: Polish = Polish {
        starts: 0,
        min_step: 1e-7,
    };
    pub const DEFAULT: Polish = Polish {
        starts: 2,
        min_step: 1e-7,
    };
}

impl Default for Polish {
    fn default() -> Self {
        Polish::DEFAULT
    }
}

/// Maximum of `f` over the nodes, ties to the lowest index.
pub fn sup_over_nodes<F>(nodes: &[CosetPoint], f: F) -> SupResult
where
    F: Fn(&CosetPoint) -> f64 + Sync + Send,
{
    let values = exec::map_slice(nodes, &f);
    let (node, value) = exec::argmax(&values).unwrap_or((0, 0.0));
    SupResult {
        value,
        point: nodes.get(node).copied().unwrap_or(CosetPoint::NORTH),
        node,
    }
}

/// Node scan over `grid`, then compass-search polish from the best nodes.
/// The polished value is never below the scanned value.
pub fn sphere_sup<F>(grid: &EvalGrid, f: F, polish: Polish) -> SupResult
where
    F: Fn(&CosetPoint) -> f64 + Sync + Send,
{
    let values = exec::map_slice(&grid.nodes, &f);
    let (node, value) = exec::argmax(&values).unwrap_or((0, 0.0));
    let mut best = SupResult {
        value,
        point: grid.nodes[node],
        node,
    };
    if polish.starts == 0 {
        return best;
    }
    let mut order: Vec<usize> = (0..values.len()).filter(|i| !values[*i].is_nan()).collect();
    order.sort_by(|a, b| values[*b].total_cmp(&values[*a]).then(a.cmp(b)));
    for &start in order.iter().take(polish.starts) {
        let (p, v) = compass_polish(
            &f,
            grid.nodes[start],
            values[start],
            grid.spacing,
            polish.min_step,
        );
        if v > best.value {
            best = SupResult {
                value: v,
                point: p,
                node,
            };
        }
    }
    best
}

fn tangent_basis(x: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let axis = if x[0].abs() <= x[1].abs() && x[0].abs() <= x[2].abs() {
        [1.0, 0.0, 0.0]
    } else if x[1].abs() <= x[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = normalize(cross(axis, x));
    let e2 = cross(x, e1);
    (e1, e2)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}

/// Compass search for a local maximum starting at `x0`.
pub fn compass_polish<F>(
    f: &F,
    x0: CosetPoint,
    f0: f64,
    step: f64,
    min_step: f64,
) -> (CosetPoint, f64)
where
    F: Fn(&CosetPoint) -> f64,
{
    let mut x = x0;
    let mut fx = f0;
    let mut h = step * 0.5;
    let mut evals = 0;
    while h > min_step && evals < 400 {
        let c = x.to_vector();
        let (e1, e2) = tangent_basis(c);
        let mut improved = false;
        for (s, t) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let y = CosetPoint::from_vector([
                c[0] + s * e1[0] + t * e2[0],
                c[1] + s * e1[1] + t * e2[1],
                c[2] + s * e1[2] + t * e2[2],
            ]);
            let fy = f(&y);
            evals += 1;
            if fy > fx {
                x = y;
                fx = fy;
                improved = true;
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polish_finds_off_grid_maximum() {
        let target = CosetPoint::new(0.61, 1.37).unwrap().to_vector();
        let f = |x: &CosetPoint| {
            let v = x.to_vector();
            v[0] * target[0] + v[1] * target[1] + v[2] * target[2]
        };
        let grid = EvalGrid::new(8, 8);
        let coarse = sphere_sup(&grid, f, Polish::OFF);
        let fine = sphere_sup(&grid, f, Polish::DEFAULT);
        assert!(coarse.value < 0.999);
        assert!((fine.value - 1.0).abs() < 1e-12);
        assert!(fine.value >= coarse.value);
    }
}
