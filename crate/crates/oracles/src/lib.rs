//! Reference computations for tests.
//!
//! Each routine here takes a deliberately different route from the library
//! code it checks (direct sums instead of separable filters, counting ranks
//! instead of sorting, matrix solves instead of centered moments), so a
//! shared mistake is unlikely.

use nalgebra::{Matrix2, Vector2};

/// CIEDE2000 verification pairs: `(Lab1, Lab2, ΔE00)`, 34 rows.
pub const CIEDE2000_PAIRS: [([f64; 3], [f64; 3], f64); 34] = [
    ([50.0000, 2.6772, -79.7751], [50.0000, 0.0000, -82.7485], 2.0425),
    ([50.0000, 3.1571, -77.2803], [50.0000, 0.0000, -82.7485], 2.8615),
    ([50.0000, 2.8361, -74.0200], [50.0000, 0.0000, -82.7485], 3.4412),
    ([50.0000, -1.3802, -84.2814], [50.0000, 0.0000, -82.7485], 1.0000),
    ([50.0000, -1.1848, -84.8006], [50.0000, 0.0000, -82.7485], 1.0000),
    ([50.0000, -0.9009, -85.5211], [50.0000, 0.0000, -82.7485], 1.0000),
    ([50.0000, 0.0000, 0.0000], [50.0000, -1.0000, 2.0000], 2.3669),
    ([50.0000, -1.0000, 2.0000], [50.0000, 0.0000, 0.0000], 2.3669),
    ([50.0000, 2.4900, -0.0010], [50.0000, -2.4900, 0.0009], 7.1792),
    ([50.0000, 2.4900, -0.0010], [50.0000, -2.4900, 0.0010], 7.1792),
    ([50.0000, 2.4900, -0.0010], [50.0000, -2.4900, 0.0011], 7.2195),
    ([50.0000, 2.4900, -0.0010], [50.0000, -2.4900, 0.0012], 7.2195),
    ([50.0000, -0.0010, 2.4900], [50.0000, 0.0009, -2.4900], 4.8045),
    ([50.0000, -0.0010, 2.4900], [50.0000, 0.0010, -2.4900], 4.8045),
    ([50.0000, -0.0010, 2.4900], [50.0000, 0.0011, -2.4900], 4.7461),
    ([50.0000, 2.5000, 0.0000], [50.0000, 0.0000, -2.5000], 4.3065),
    ([50.0000, 2.5000, 0.0000], [73.0000, 25.0000, -18.0000], 27.1492),
    ([50.0000, 2.5000, 0.0000], [61.0000, -5.0000, 29.0000], 22.8977),
    ([50.0000, 2.5000, 0.0000], [56.0000, -27.0000, -3.0000], 31.9030),
    ([50.0000, 2.5000, 0.0000], [58.0000, 24.0000, 15.0000], 19.4535),
    ([50.0000, 2.5000, 0.0000], [50.0000, 3.1736, 0.5854], 1.0000),
    ([50.0000, 2.5000, 0.0000], [50.0000, 3.2972, 0.0000], 1.0000),
    ([50.0000, 2.5000, 0.0000], [50.0000, 1.8634, 0.5757], 1.0000),
    ([50.0000, 2.5000, 0.0000], [50.0000, 3.2592, 0.3350], 1.0000),
    ([60.2574, -34.0099, 36.2677], [60.4626, -34.1751, 39.4387], 1.2644),
    ([63.0109, -31.0961, -5.8663], [62.8187, -29.7946, -4.0864], 1.2630),
    ([61.2901, 3.7196, -5.3901], [61.4292, 2.2480, -4.9620], 1.8731),
    ([35.0831, -44.1164, 3.7933], [35.0232, -40.0716, 1.5901], 1.8645),
    ([22.7233, 20.0904, -46.6940], [23.0331, 14.9730, -42.5619], 2.0373),
    ([36.4612, 47.8580, 18.3852], [36.2715, 50.5065, 21.2231], 1.4146),
    ([90.8027, -2.0831, 1.4410], [91.1528, -1.6435, 0.0447], 1.4441),
    ([90.9257, -0.5406, -0.9208], [88.6381, -0.8985, -0.7239], 1.5381),
    ([6.7747, -0.2908, -2.4247], [5.8714, -0.0985, -2.2286], 0.6377),
    ([2.0776, 0.0795, -1.1350], [0.9033, -0.0636, -0.5514], 0.9082),
];

/// CIEDE2000 computed entirely in radians from the defining equations.
pub fn delta_e_2000(lab1: [f64; 3], lab2: [f64; 3]) -> f64 {
    use std::f64::consts::PI;
    let [l1, a1, b1] = lab1;
    let [l2, a2, b2] = lab2;
    let deg = PI / 180.0;

    let cab = ((a1 * a1 + b1 * b1).sqrt() + (a2 * a2 + b2 * b2).sqrt()) / 2.0;
    let g = 0.5 * (1.0 - (cab.powf(7.0) / (cab.powf(7.0) + 25f64.powf(7.0))).sqrt());
    let ap1 = a1 * (1.0 + g);
    let ap2 = a2 * (1.0 + g);
    let cp1 = (ap1 * ap1 + b1 * b1).sqrt();
    let cp2 = (ap2 * ap2 + b2 * b2).sqrt();
    let angle = |b: f64, a: f64| {
        if b == 0.0 && a == 0.0 {
            0.0
        } else {
            let h = b.atan2(a);
            if h < 0.0 {
                h + 2.0 * PI
            } else {
                h
            }
        }
    };
    let hp1 = angle(b1, ap1);
    let hp2 = angle(b2, ap2);

    let d_lp = l2 - l1;
    let d_cp = cp2 - cp1;
    let d_hp = if cp1 * cp2 == 0.0 {
        0.0
    } else if (hp2 - hp1).abs() <= PI {
        hp2 - hp1
    } else if hp2 - hp1 > PI {
        hp2 - hp1 - 2.0 * PI
    } else {
        hp2 - hp1 + 2.0 * PI
    };
    let d_big_hp = 2.0 * (cp1 * cp2).sqrt() * (d_hp / 2.0).sin();

    let lp_mean = (l1 + l2) / 2.0;
    let cp_mean = (cp1 + cp2) / 2.0;
    let hp_mean = if cp1 * cp2 == 0.0 {
        hp1 + hp2
    } else if (hp1 - hp2).abs() <= PI {
        (hp1 + hp2) / 2.0
    } else if hp1 + hp2 < 2.0 * PI {
        (hp1 + hp2 + 2.0 * PI) / 2.0
    } else {
        (hp1 + hp2 - 2.0 * PI) / 2.0
    };

    let t = 1.0 - 0.17 * (hp_mean - 30.0 * deg).cos() + 0.24 * (2.0 * hp_mean).cos()
        + 0.32 * (3.0 * hp_mean + 6.0 * deg).cos()
        - 0.20 * (4.0 * hp_mean - 63.0 * deg).cos();
    let d_theta = 30.0 * deg * (-((hp_mean / deg - 275.0) / 25.0).powi(2)).exp();
    let rc = 2.0 * (cp_mean.powf(7.0) / (cp_mean.powf(7.0) + 25f64.powf(7.0))).sqrt();
    let sl = 1.0 + (0.015 * (lp_mean - 50.0).powi(2)) / (20.0 + (lp_mean - 50.0).powi(2)).sqrt();
    let sc = 1.0 + 0.045 * cp_mean;
    let sh = 1.0 + 0.015 * cp_mean * t;
    let rt = -(2.0 * d_theta).sin() * rc;

    ((d_lp / sl).powi(2) + (d_cp / sc).powi(2) + (d_big_hp / sh).powi(2) + rt * (d_cp / sc) * (d_big_hp / sh)).sqrt()
}

/// Rank of each value by counting: `#less + (#equal + 1) / 2`.
pub fn counting_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Textbook Pearson correlation; `None` when either side is constant.
pub fn pearson_direct(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let num = n * sxy - sx * sy;
    let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    Some(num / den)
}

/// |Spearman| by counting ranks then textbook Pearson.
pub fn spearman_bruteforce(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson_direct(&counting_ranks(x), &counting_ranks(y)).map(f64::abs)
}

/// Weighted least squares line through the 2x2 normal equations.
/// Returns `(slope, intercept)`.
pub fn wls_normal_equations(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let (mut s_w, mut s_x, mut s_xx, mut s_y, mut s_xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        s_w += wi;
        s_x += wi * xi;
        s_xx += wi * xi * xi;
        s_y += wi * yi;
        s_xy += wi * xi * yi;
    }
    let a = Matrix2::new(s_xx, s_x, s_x, s_w);
    let rhs = Vector2::new(s_xy, s_y);
    let sol = a.lu().solve(&rhs).expect("non-singular normal equations");
    (sol[0], sol[1])
}

/// SSIM by explicit weighted sums over every 11x11 window (no separable
/// filtering, no precomputed moment planes). `a` and `b` are grayscale
/// planes in row-major order.
pub fn ssim_direct(a: &[f64], b: &[f64], width: usize, height: usize) -> f64 {
    let sigma: f64 = 1.5;
    let mut kernel = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in kernel.iter_mut().enumerate() {
        for (j, k) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *k = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            total += *k;
        }
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let mut sum = 0.0;
    let mut count = 0usize;
    for y0 in 0..=(height - 11) {
        for x0 in 0..=(width - 11) {
            let (mut mx, mut my) = (0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let w = kernel[i][j] / total;
                    let idx = (y0 + i) * width + x0 + j;
                    mx += w * a[idx];
                    my += w * b[idx];
                }
            }
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let w = kernel[i][j] / total;
                    let idx = (y0 + i) * width + x0 + j;
                    vx += w * (a[idx] - mx).powi(2);
                    vy += w * (b[idx] - my).powi(2);
                    cov += w * (a[idx] - mx) * (b[idx] - my);
                }
            }
            sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    sum / count as f64
}

/// Wasserstein-1 between two equally sized samples: mean gap of order
/// statistics.
pub fn w1_sorted_samples(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// String-level canonicalization of an absolute `scheme://host[:port]/path?query#frag`
/// URL with no userinfo or percent-escapes.
pub fn normalize_absolute_url(url: &str) -> String {
    let (scheme, rest) = url.split_once("://").expect("absolute url");
    let scheme = scheme.to_ascii_lowercase();
    let rest = rest.split('#').next().unwrap_or("");
    let (authority, tail) = match rest.find(['/', '?']) {
        Some(i) => rest.split_at(i),
        None => (rest, ""),
    };
    let (path, query) = match tail.split_once('?') {
        Some((p, q)) => (p, Some(q)),
        None => (tail, None),
    };
    let mut host = authority.to_ascii_lowercase();
    let default_port = match scheme.as_str() {
        "http" => Some(":80"),
        "https" => Some(":443"),
        _ => None,
    };
    if let Some(port) = default_port {
        if host.ends_with(port) {
            host.truncate(host.len() - port.len());
        }
    }
    let mut path = if path.is_empty() { "/".to_string() } else { path.to_string() };
    while path.len() > 1 && path.ends_with('/') {
        path.pop();
    }
    let mut out = format!("{scheme}://{host}{path}");
    if let Some(q) = query {
        out.push('?');
        out.push_str(q);
    }
    out
}

/// Longest common subsequence length by exhaustive subsequence search of the
/// shorter string (for short inputs only).
pub fn lcs_exhaustive(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    assert!(short.len() <= 16, "exhaustive LCS is exponential");
    let is_subseq = |mask: u32| {
        let mut it = long.iter();
        (0..short.len())
            .filter(|i| mask & (1 << i) != 0)
            .all(|i| it.any(|c| *c == short[i]))
    };
    (0..(1u32 << short.len()))
        .filter(|&m| is_subseq(m))
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}
