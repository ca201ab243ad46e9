//! Single-site conditional laws of the capped pinned measure.
//!
//! Given the four neighbor heights `n_i`, the law of the site is
//! `p(k) ~ exp(-beta sum_i |k - n_i| + h 1{k = 0})` on `0..=cap`. The energy is
//! piecewise linear in `k` with breakpoints at the sorted neighbors, so the
//! normalization is a sum over at most five geometric segments.

use crate::lattice::Parameters;

/// `sum_{j=0}^{len-1} exp(-beta slope j)`.
fn geometric(beta: f64, slope: i64, len: i64) -> f64 {
    if len <= 0 {
        return 0.0;
    }
    if slope == 0 {
        return len as f64;
    }
    let r = -beta * slope as f64;
    // (1 - e^{r len}) / (1 - e^{r}), written with expm1
    (r * len as f64).exp_m1() / r.exp_m1()
}

/// The conditional law at one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteConditional {
    sorted: [u32; 4],
    beta: f64,
    h: f64,
    cap: u32,
    /// `min_k sum_i |k - n_i|`, subtracted from every energy.
    floor: i64,
}

impl SiteConditional {
    pub fn new(neighbors: [u32; 4], beta: f64, h: f64, cap: u32) -> Self {
        let mut sorted = neighbors;
        sorted.sort_unstable();
        let floor = (sorted[3] + sorted[2]) as i64 - (sorted[1] + sorted[0]) as i64;
        Self {
            sorted,
            beta,
            h,
            cap,
            floor,
        }
    }

    pub fn from_params(neighbors: [u32; 4], params: &Parameters, cap: u32) -> Self {
        Self::new(neighbors, params.beta(), params.h(), cap)
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    fn energy(&self, k: i64) -> i64 {
        self.sorted
            .iter()
            .map(|&n| (k - n as i64).abs())
            .sum::<i64>()
            - self.floor
    }

    /// Unnormalized weight of height `k`, relative to the energy minimum.
    pub fn weight(&self, k: u32) -> f64 {
        let w = (-self.beta * self.energy(k as i64) as f64).exp();
        if k == 0 {
            w * self.h.exp()
        } else {
            w
        }
    }

    /// Mass of the heights `lo..=hi` without the pinning atom, by segments.
    fn segment_mass(&self, lo: i64, hi: i64) -> f64 {
        let mut total = 0.0;
        let mut start = lo;
        // breakpoints split [lo, hi] into runs of constant slope
        for (j, &b) in self.sorted.iter().enumerate() {
            let b = b as i64;
            if start > hi {
                break;
            }
            if b >= start {
                let end = b.min(hi);
                let slope = 2 * j as i64 - 4;
                total += (-self.beta * self.energy(start) as f64).exp()
                    * geometric(self.beta, slope, end - start + 1);
                start = end + 1;
            }
        }
        if start <= hi {
            total += (-self.beta * self.energy(start) as f64).exp()
                * geometric(self.beta, 4, hi - start + 1);
        }
        total
    }

    /// Normalizing constant over `0..=cap`.
    pub fn normalizer(&self) -> f64 {
        let atom = (-self.beta * self.energy(0) as f64).exp() * self.h.exp_m1();
        self.segment_mass(0, self.cap as i64) + atom
    }

    /// Normalizing constant without the cap: adds the geometric tail above it.
    pub fn uncapped_normalizer(&self) -> f64 {
        // above cap >= max neighbor the slope is +4
        let top = self.cap as i64;
        let tail = if top >= self.sorted[3] as i64 {
            let r = (-4.0 * self.beta).exp();
            (-self.beta * self.energy(top) as f64).exp() * r / -(-4.0 * self.beta).exp_m1()
        } else {
            f64::INFINITY
        };
        self.normalizer() + tail
    }

    /// Probability vector over `0..=cap`.
    pub fn probabilities(&self) -> Vec<f64> {
        let z = self.normalizer();
        (0..=self.cap).map(|k| self.weight(k) / z).collect()
    }

    /// Cumulative distribution over `0..=cap`; the last entry is exactly 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .probabilities()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *out.last_mut().expect("cap + 1 >= 1 entries") = 1.0;
        out
    }

    /// `P(k <= cap)` under the uncapped law.
    pub fn capped_fraction(&self) -> f64 {
        self.normalizer() / self.uncapped_normalizer()
    }

    /// Inverse-CDF draw: the least `k` with `u < F(k)`.
    pub fn sample(&self, u: f64) -> u32 {
        let cdf = self.cdf();
        cdf.iter().position(|&f| u < f).unwrap_or(self.cap as usize) as u32
    }
}

/// Probability vector of a site given its four neighbor heights (boundary
/// neighbors count as zero).
pub fn conditional_distribution(neighbors: [u32; 4], params: &Parameters, cap: u32) -> Vec<f64> {
    SiteConditional::from_params(neighbors, params, cap).probabilities()
}

/// Precomputed inverse-CDF tables for every multiset of four neighbor heights
/// in `0..=cap`.
///
/// Multisets are ranked with the combinatorial number system: sorted
/// `a <= b <= c <= d` maps to `C(a, 1) + C(b + 1, 2) + C(c + 2, 3) + C(d + 3, 4)`.
#[derive(Debug, Clone)]
pub struct ConditionalTable {
    cap: u32,
    stride: usize,
    cdf: Vec<f64>,
    capped_fraction: Vec<f64>,
    binom2: Vec<usize>,
    binom3: Vec<usize>,
    binom4: Vec<usize>,
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl ConditionalTable {
    pub fn new(params: &Parameters, cap: u32) -> Self {
        let m = cap as usize;
        let stride = m + 1;
        let entries = binom(m + 4, 4);
        let mut table = Self {
            cap,
            stride,
            cdf: vec![0.0; entries * stride],
            capped_fraction: vec![1.0; entries],
            binom2: (0..m + 5).map(|x| binom(x, 2)).collect(),
            binom3: (0..m + 5).map(|x| binom(x, 3)).collect(),
            binom4: (0..m + 5).map(|x| binom(x, 4)).collect(),
        };
        for d in 0..=cap {
            for c in 0..=d {
                for b in 0..=c {
                    for a in 0..=b {
                        let rank = table.rank([a, b, c, d]);
                        let law = SiteConditional::from_params([a, b, c, d], params, cap);
                        table.cdf[rank * stride..(rank + 1) * stride].copy_from_slice(&law.cdf());
                        table.capped_fraction[rank] = law.capped_fraction();
                    }
                }
            }
        }
        table
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Rank of a sorted neighbor quadruple.
    #[inline]
    fn rank(&self, s: [u32; 4]) -> usize {
        s[0] as usize
            + self.binom2[s[1] as usize + 1]
            + self.binom3[s[2] as usize + 2]
            + self.binom4[s[3] as usize + 3]
    }

    #[inline]
    fn rank_unsorted(&self, n: [u32; 4]) -> usize {
        let [mut a, mut b, mut c, mut d] = n;
        // five-comparator sorting network
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if c > d {
            std::mem::swap(&mut c, &mut d);
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
        }
        if b > d {
            std::mem::swap(&mut b, &mut d);
        }
        if b > c {
            std::mem::swap(&mut b, &mut c);
        }
        self.rank([a, b, c, d])
    }

    /// Inverse-CDF draw for the given neighbors and uniform `u` in `[0, 1)`.
    /// The flag is set when the uncapped law would have put `u` above the cap.
    #[inline]
    pub fn sample(&self, neighbors: [u32; 4], u: f64) -> (u32, bool) {
        let rank = self.rank_unsorted(neighbors);
        let row = &self.cdf[rank * self.stride..(rank + 1) * self.stride];
        let mut k = 0;
        while u >= row[k] {
            k += 1;
        }
        (k as u32, u >= self.capped_fraction[rank])
    }

    /// The stored CDF row for the given neighbors.
    pub fn cdf(&self, neighbors: [u32; 4]) -> &[f64] {
        let rank = self.rank_unsorted(neighbors);
        &self.cdf[rank * self.stride..(rank + 1) * self.stride]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::critical_h;

    /// Direct exponentiation and summation over `0..=cap`.
    fn brute(neighbors: [u32; 4], beta: f64, h: f64, cap: u32) -> Vec<f64> {
        let w: Vec<f64> = (0..=cap)
            .map(|k| {
                let e: i64 = neighbors.iter().map(|&n| (k as i64 - n as i64).abs()).sum();
                (-beta * e as f64 + if k == 0 { h } else { 0.0 }).exp()
            })
            .collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }

    #[test]
    fn matches_brute_force() {
        for &(nb, beta, h, cap) in &[
            ([0, 0, 0, 0], 1.0, 0.0, 6),
            ([0, 0, 0, 0], 1.0, 0.7, 6),
            ([3, 1, 0, 2], 0.5, 0.3, 8),
            ([5, 5, 2, 7], 1.3, 0.0, 12),
            ([4, 4, 4, 4], 2.0, critical_h(2.0), 4),
            ([1, 9, 3, 0], 0.25, 1.5, 20),
        ] {
            let got = SiteConditional::new(nb, beta, h, cap).probabilities();
            let want = brute(nb, beta, h, cap);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-13, "{nb:?} {g} {w}");
            }
        }
    }

    #[test]
    fn flat_neighbors_are_geometric() {
        let p = SiteConditional::new([0; 4], 1.0, 0.0, 40).probabilities();
        for k in 1..10 {
            assert!((p[k] / p[k - 1] - (-4f64).exp()).abs() < 1e-12);
        }
        let h = 0.4;
        let p = SiteConditional::new([0; 4], 1.0, h, 40).probabilities();
        let tail: f64 = (1..=40).map(|k| (-4.0 * k as f64).exp()).sum();
        assert!((p[0] - h.exp() / (h.exp() + tail)).abs() < 1e-14);
    }

    #[test]
    fn normalized_and_unimodal() {
        for a in 0..5 {
            for b in 0..5 {
                for c in [0, 2, 6] {
                    let nb = [a, b, c, 3];
                    let law = SiteConditional::new(nb, 1.1, 0.2, 8);
                    let p = law.probabilities();
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    let argmax =
                        (0..p.len()).max_by(|&i, &j| p[i].total_cmp(&p[j])).unwrap() as u32;
                    let (lo, hi) = (*nb.iter().min().unwrap(), *nb.iter().max().unwrap());
                    assert!(argmax == 0 || (lo..=hi).contains(&argmax));
                }
            }
        }
    }

    #[test]
    fn uncapped_normalizer_adds_tail() {
        let law = SiteConditional::new([1, 2, 0, 1], 1.0, 0.1, 3);
        let long = SiteConditional::new([1, 2, 0, 1], 1.0, 0.1, 60);
        assert!((law.uncapped_normalizer() - long.normalizer()).abs() < 1e-13);
        assert!(law.capped_fraction() < 1.0);
    }

    #[test]
    fn table_agrees_with_direct_sampling() {
        let params = Parameters::new(1.0, 0.3, 4).unwrap();
        let cap = 5;
        let table = ConditionalTable::new(&params, cap);
        let mut rank_seen = std::collections::HashSet::new();
        for a in 0..=cap {
            for b in 0..=cap {
                for c in 0..=cap {
                    for d in 0..=cap {
                        let nb = [a, b, c, d];
                        rank_seen.insert(table.rank_unsorted(nb));
                        let law = SiteConditional::from_params(nb, &params, cap);
                        assert_eq!(table.cdf(nb), law.cdf().as_slice());
                        for u in [0.0, 0.1, 0.5, 0.93, 0.999999] {
                            assert_eq!(table.sample(nb, u).0, law.sample(u));
                        }
                    }
                }
            }
        }
        assert_eq!(rank_seen.len(), binom(cap as usize + 4, 4));
        assert_eq!(
            *rank_seen.iter().max().unwrap(),
            binom(cap as usize + 4, 4) - 1
        );
    }
}
