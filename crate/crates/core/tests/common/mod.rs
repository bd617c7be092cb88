//! Oracles shared by the integration tests.

#![allow(dead_code)]

/// Ray angles are multiples of `pi / 12`.
pub const GRID: i32 = 24;

/// Admissibility by trying every subset and parity with integer angles.
/// `rays` holds (grid index, is_one_point), sorted by grid index.
pub fn brute_admissible(rays: &[(i32, bool)]) -> bool {
    let n = rays.len();
    let gap = |i: usize, j: usize| {
        let d = rays[j].0 - rays[i].0;
        if d > 0 {
            d
        } else {
            d + GRID
        }
    };
    let target = (0..n).map(|i| gap(i, (i + 1) % n)).max().unwrap();
    // rho = 12 / target > 1/2
    if target >= GRID {
        return false;
    }
    for mask in 1u32..(1 << n) {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let chosen: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let k = chosen.len();
        for first_even in [false, true] {
            let ok = (0..k).all(|j| {
                let (s, e) = (chosen[j], chosen[(j + 1) % k]);
                let open = gap(s, e);
                let empty = (s + 1) % n == e;
                if (j % 2 == 0) == first_even {
                    return open == target && empty;
                }
                let l = rays[s].1;
                let mut i = (s + 1) % n;
                while i != e {
                    if rays[i].1 == l {
                        return false;
                    }
                    i = (i + 1) % n;
                }
                open <= target && rays[e].1 == l && (!empty || open == target)
            });
            if ok {
                return true;
            }
        }
    }
    false
}

/// Calls `f` for every labeled system of at most `max_rays` grid rays.
pub fn for_each_grid_system(max_rays: usize, mut f: impl FnMut(&[(i32, bool)])) {
    fn rec(start: i32, left: usize, cur: &mut Vec<(i32, bool)>, f: &mut dyn FnMut(&[(i32, bool)])) {
        if !cur.is_empty() {
            f(cur);
        }
        if left == 0 {
            return;
        }
        for k in start..GRID {
            for label in [false, true] {
                cur.push((k, label));
                rec(k + 1, left - 1, cur, f);
                cur.pop();
            }
        }
    }
    rec(0, max_rays, &mut Vec::new(), &mut f);
}

/// `-u'' + x^4 u = lambda u` on the real line by RK4 shooting from `x = 0`
/// to `x = 5` with the parity condition at the origin.
pub fn quartic_eigenvalue(lo: f64, hi: f64, odd: bool) -> f64 {
    let shoot = |lam: f64| {
        let n = 20_000;
        let h = 5.0 / n as f64;
        let (mut u, mut v) = if odd { (0.0, 1.0) } else { (1.0, 0.0) };
        let rhs = |x: f64, u: f64, v: f64| (v, (x.powi(4) - lam) * u);
        for i in 0..n {
            let x = i as f64 * h;
            let k1 = rhs(x, u, v);
            let k2 = rhs(x + h / 2.0, u + h / 2.0 * k1.0, v + h / 2.0 * k1.1);
            let k3 = rhs(x + h / 2.0, u + h / 2.0 * k2.0, v + h / 2.0 * k2.1);
            let k4 = rhs(x + h, u + h * k3.0, v + h * k3.1);
            u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        u
    };
    let (mut a, mut b) = (lo, hi);
    let fa = shoot(a);
    assert!(fa * shoot(b) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..50 {
        let mid = 0.5 * (a + b);
        if (shoot(mid) > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
