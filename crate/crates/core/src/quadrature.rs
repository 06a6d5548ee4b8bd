//! Exact and Gauss–Legendre integration on boxes.
//!
//! All box integrals here are over a box centred at the origin with the
//! given half-widths; callers translate their integrands accordingly.

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(points: usize) -> (&'static [f64], &'static [f64]) {
    const N1: [f64; 1] = [0.0];
    const W1: [f64; 1] = [2.0];
    const N2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
    const W2: [f64; 2] = [1.0, 1.0];
    const N3: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W3: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    const N5: [f64; 5] =
        [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W5: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    match points {
        1 => (&N1, &W1),
        2 => (&N2, &W2),
        3 => (&N3, &W3),
        _ => (&N5, &W5),
    }
}

/// Tensor-product Gauss points on the box `Π [-h_i, h_i]`: returns
/// `(offset, weight)` pairs whose weights sum to the box volume.
pub fn box_rule(half: &[f64], points: usize) -> Vec<(Vec<f64>, f64)> {
    let (nodes, weights) = gauss_legendre(points);
    let k = nodes.len();
    let dim = half.len();
    let total = k.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut z = vec![0.0; dim];
        let mut w = 1.0;
        for axis in 0..dim {
            let q = rest % k;
            rest /= k;
            z[axis] = nodes[q] * half[axis];
            w *= weights[q] * half[axis];
        }
        out.push((z, w));
    }
    out
}

/// `∫ (c + b·z)_+ dz` over `Π [-h_i, h_i]`, exact up to rounding.
///
/// Axes whose slope contribution is negligible are integrated by a
/// 5-point Gauss rule over the exact lower-dimensional integral, which
/// avoids the cancellation of the vertex formula.
pub fn integral_positive_part(c: f64, b: &[f64], half: &[f64]) -> f64 {
    let spread: f64 = b.iter().zip(half).map(|(bi, hi)| bi.abs() * hi).sum();
    let vol: f64 = half.iter().map(|h| 2.0 * h).product();
    if c >= spread {
        return c * vol;
    }
    if c <= -spread {
        return 0.0;
    }
    let scale = c.abs() + spread;
    // Find an axis too flat for the vertex formula.
    if let Some(axis) = (0..b.len()).find(|&i| b[i].abs() * half[i] <= 1e-4 * scale) {
        let rb: Vec<f64> = b.iter().enumerate().filter(|&(i, _)| i != axis).map(|(_, v)| *v).collect();
        let rh: Vec<f64> = half.iter().enumerate().filter(|&(i, _)| i != axis).map(|(_, v)| *v).collect();
        if b[axis].abs() * half[axis] <= 1e-15 * scale {
            return 2.0 * half[axis] * integral_positive_part(c, &rb, &rh);
        }
        let (nodes, weights) = gauss_legendre(5);
        return nodes
            .iter()
            .zip(weights)
            .map(|(t, w)| w * half[axis] * integral_positive_part(c + b[axis] * t * half[axis], &rb, &rh))
            .sum();
    }
    let k = b.len();
    let mut fact = 1.0;
    for i in 2..=k + 1 {
        fact *= i as f64;
    }
    let denom: f64 = fact * b.iter().product::<f64>();
    let mut acc = 0.0;
    for mask in 0..(1usize << k) {
        let mut arg = c;
        let mut sign = 1.0;
        for i in 0..k {
            if mask >> i & 1 == 1 {
                arg += b[i] * half[i];
            } else {
                arg -= b[i] * half[i];
                sign = -sign;
            }
        }
        if arg > 0.0 {
            acc += sign * arg.powi(k as i32 + 1);
        }
    }
    acc / denom
}

/// `∫ |c + b·z| dz` over `Π [-h_i, h_i]`.
pub fn integral_abs_affine(c: f64, b: &[f64], half: &[f64]) -> f64 {
    let vol: f64 = half.iter().map(|h| 2.0 * h).product();
    // |ℓ| = ℓ + 2 (−ℓ)_+ ; the mean of ℓ over a centred box is c.
    let neg: Vec<f64> = b.iter().map(|v| -v).collect();
    let val = c * vol + 2.0 * integral_positive_part(-c, &neg, half);
    val.max(0.0)
}

/// `∫_{-h}^{h} |p0 + p1 t + p2 t²| dt`, split at the real roots.
pub fn integral_abs_quadratic_1d(p0: f64, p1: f64, p2: f64, h: f64) -> f64 {
    let prim = |t: f64| p0 * t + p1 * t * t / 2.0 + p2 * t * t * t / 3.0;
    let mut cuts = vec![-h];
    if p2.abs() > 1e-300 {
        let disc = p1 * p1 - 4.0 * p2 * p0;
        if disc > 0.0 {
            let sq = disc.sqrt();
            // Stable root pair.
            let q = -0.5 * (p1 + p1.signum() * sq);
            let mut roots = vec![q / p2];
            if q != 0.0 {
                roots.push(p0 / q);
            }
            roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.extend(roots.into_iter().filter(|r| *r > -h && *r < h));
        }
    } else if p1.abs() > 1e-300 {
        let r = -p0 / p1;
        if r > -h && r < h {
            cuts.push(r);
        }
    }
    cuts.push(h);
    cuts.windows(2).map(|w| (prim(w[1]) - prim(w[0])).abs()).sum()
}
