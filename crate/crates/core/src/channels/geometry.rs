//! Closest point of a planar convex hull, with the convex weights that
//! realize it.

/// Result of projecting a query point onto `conv(points)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HullProjection {
    pub point: (f64, f64),
    pub distance: f64,
    /// Convex weights over the input points (at most three nonzero).
    pub weights: Vec<f64>,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Indices of the convex hull vertices in counter-clockwise order (monotone
/// chain). Collinear and duplicate points are dropped.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[a].1.total_cmp(&points[b].1))
            .then(a.cmp(&b))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let eps = 1e-15;
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && cross(
                    points[hull[hull.len() - 2]],
                    points[hull[hull.len() - 1]],
                    points[i],
                ) <= eps
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

fn project_segment(a: (f64, f64), b: (f64, f64), q: (f64, f64)) -> (f64, (f64, f64)) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (t, (a.0 + t * dx, a.1 + t * dy))
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Exact projection of `q` onto the convex hull of a nonempty point set.
pub fn project_onto_hull(points: &[(f64, f64)], q: (f64, f64)) -> HullProjection {
    assert!(!points.is_empty(), "empty point set");
    let hull = convex_hull(points);
    let mut weights = vec![0.0; points.len()];
    if hull.len() == 1 {
        weights[hull[0]] = 1.0;
        let p = points[hull[0]];
        return HullProjection {
            point: p,
            distance: dist(p, q),
            weights,
        };
    }
    // inside test for a proper polygon
    if hull.len() >= 3 {
        let h = hull.len();
        let inside = (0..h).all(|k| cross(points[hull[k]], points[hull[(k + 1) % h]], q) >= 0.0);
        if inside {
            // fan triangulation from hull[0]
            let o = points[hull[0]];
            for k in 1..h - 1 {
                let (a, b) = (points[hull[k]], points[hull[k + 1]]);
                let area = cross(o, a, b);
                let wa = cross(o, q, b) / area;
                let wb = cross(o, a, q) / area;
                let wo = 1.0 - wa - wb;
                if wa >= -1e-14 && wb >= -1e-14 && wo >= -1e-14 {
                    weights[hull[0]] = wo.max(0.0);
                    weights[hull[k]] = wa.max(0.0);
                    weights[hull[k + 1]] = wb.max(0.0);
                    let s: f64 = weights.iter().sum();
                    weights.iter_mut().for_each(|w| *w /= s);
                    return HullProjection {
                        point: q,
                        distance: 0.0,
                        weights,
                    };
                }
            }
        }
    }
    let h = hull.len();
    let edges = if h == 2 { 1 } else { h };
    let mut best = (f64::INFINITY, 0, 0.0, (0.0, 0.0));
    for k in 0..edges {
        let (i, j) = (hull[k], hull[(k + 1) % h]);
        let (t, p) = project_segment(points[i], points[j], q);
        let d = dist(p, q);
        if d < best.0 {
            best = (d, k, t, p);
        }
    }
    let (d, k, t, p) = best;
    let (i, j) = (hull[k], hull[(k + 1) % h]);
    weights[i] += 1.0 - t;
    weights[j] += t;
    HullProjection {
        point: p,
        distance: d,
        weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_contains_origin() {
        let pts = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        let pr = project_onto_hull(&pts, (0.0, 0.0));
        assert_eq!(pr.distance, 0.0);
        let (x, y) = pts
            .iter()
            .zip(&pr.weights)
            .fold((0.0, 0.0), |(x, y), (p, w)| (x + w * p.0, y + w * p.1));
        assert!(x.abs() < 1e-15 && y.abs() < 1e-15);
    }

    #[test]
    fn outside_projects_to_edge() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (1.0, -1.0)];
        let pr = project_onto_hull(&pts, (1.0, 1.0));
        assert!((pr.distance - 1.0).abs() < 1e-15);
        assert!((pr.weights[0] - 0.5).abs() < 1e-15);
        assert!((pr.weights[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collinear_and_duplicate_points() {
        let pts = [(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (1.0, 0.0)];
        let pr = project_onto_hull(&pts, (0.5, 2.0));
        assert!((pr.distance - 2.0).abs() < 1e-15);
        let pr = project_onto_hull(&[(0.3, 0.4)], (0.0, 0.0));
        assert!((pr.distance - 0.5).abs() < 1e-15);
    }
}
