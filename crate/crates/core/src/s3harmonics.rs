//! Real hyperspherical harmonics on S³: coefficient vectors, product
//! quadrature grids, and the forward/inverse transforms between them.
//!
//! Coordinates: ξ = (sinψ sinθ cosφ, sinψ sinθ sinφ, sinψ cosθ, cosψ), so the
//! north pole N = (0,0,0,1) sits at ψ = 0. The basis is
//!
//! ```text
//! Y_{lkm}(ψ,θ,φ) = A_{lk} sin^k ψ C^{k+1}_{l−k}(cos ψ) · B_{k|m|} P_k^{|m|}(cos θ) T_m(φ)
//! ```
//!
//! with T_m = cos(mφ) for m > 0, sin(|m|φ) for m < 0 and 1 for m = 0. The
//! constants A and B are fixed by unit quadrature norm when a
//! [`HarmonicBasis`] is built. Zonal functions (depending on ψ only) use
//! Z_l = c_l sin((l+1)ψ)/sin ψ, which coincides with Y_{l00}.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::quad::{chebyshev2_polar, gauss_legendre};
use crate::specialfun::{gegenbauer_scaled_all, legendre_normalized_column};

/// |S³|
pub const S3_AREA: f64 = 2.0 * PI * PI;

/// Largest degree accepted for full (non-zonal) grids.
pub const MAX_FULL_DEGREE: usize = 160;

#[inline]
fn tri(l: usize, k: usize) -> usize {
    l * (l + 1) / 2 + k
}

#[inline]
fn full_offset(l: usize) -> usize {
    l * (l + 1) * (2 * l + 1) / 6
}

/// Truncated real harmonic expansion on S³.
///
/// Full vectors are ordered l-major, then k = 0..=l, then m = −k..=k; zonal
/// vectors hold one coefficient per degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoeffs {
    degree: usize,
    zonal: bool,
    data: Vec<f64>,
}

impl HarmonicCoeffs {
    pub fn len_for(degree: usize, zonal: bool) -> usize {
        if zonal {
            degree + 1
        } else {
            full_offset(degree + 1)
        }
    }

    pub fn zeros(degree: usize, zonal: bool) -> Self {
        Self {
            degree,
            zonal,
            data: vec![0.0; Self::len_for(degree, zonal)],
        }
    }

    pub fn from_vec(degree: usize, zonal: bool, data: Vec<f64>) -> Result<Self> {
        let want = Self::len_for(degree, zonal);
        if data.len() != want {
            return input(format!(
                "coefficient vector has {} entries, degree {degree} needs {want}",
                data.len()
            ));
        }
        Ok(Self { degree, zonal, data })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zonal(&self) -> bool {
        self.zonal
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn index(&self, l: usize, k: usize, m: i64) -> Option<usize> {
        if l > self.degree || k > l || m.unsigned_abs() as usize > k {
            return None;
        }
        if self.zonal {
            (k == 0 && m == 0).then_some(l)
        } else {
            Some(full_offset(l) + k * k + (m + k as i64) as usize)
        }
    }

    pub fn get(&self, l: usize, k: usize, m: i64) -> f64 {
        self.index(l, k, m).map_or(0.0, |i| self.data[i])
    }

    pub fn set(&mut self, l: usize, k: usize, m: i64, value: f64) -> Result<()> {
        match self.index(l, k, m) {
            Some(i) => {
                self.data[i] = value;
                Ok(())
            }
            None => input(format!(
                "index (l={l}, k={k}, m={m}) outside this coefficient layout"
            )),
        }
    }

    /// Unit coefficient at (l, k, m).
    pub fn unit(degree: usize, zonal: bool, l: usize, k: usize, m: i64) -> Result<Self> {
        let mut c = Self::zeros(degree, zonal);
        c.set(l, k, m, 1.0)?;
        Ok(c)
    }

    /// Degree l of every slot, in storage order.
    pub fn slot_degrees(&self) -> Vec<usize> {
        if self.zonal {
            (0..=self.degree).collect()
        } else {
            (0..=self.degree)
                .flat_map(|l| std::iter::repeat_n(l, (l + 1) * (l + 1)))
                .collect()
        }
    }

    /// (l, k, m, value) in storage order.
    pub fn entries(&self) -> Vec<(usize, usize, i64, f64)> {
        let mut out = Vec::with_capacity(self.data.len());
        if self.zonal {
            for (l, v) in self.data.iter().enumerate() {
                out.push((l, 0, 0, *v));
            }
        } else {
            let mut idx = 0;
            for l in 0..=self.degree {
                for k in 0..=l {
                    for m in -(k as i64)..=(k as i64) {
                        out.push((l, k, m, self.data[idx]));
                        idx += 1;
                    }
                }
            }
        }
        out
    }

    /// Embeds a zonal vector in the full layout (identity on full vectors).
    pub fn to_full(&self) -> Self {
        if !self.zonal {
            return self.clone();
        }
        let mut out = Self::zeros(self.degree, false);
        for (l, v) in self.data.iter().enumerate() {
            out.data[full_offset(l)] = *v;
        }
        out
    }

    /// Truncates or zero-pads to another degree, keeping the layout.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = Self::zeros(degree, self.zonal);
        let n = out.data.len().min(self.data.len());
        out.data[..n].copy_from_slice(&self.data[..n]);
        out
    }

    fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree || self.zonal != other.zonal {
            return input(format!(
                "coefficient layouts differ: (L={}, zonal={}) vs (L={}, zonal={})",
                self.degree, self.zonal, other.degree, other.zonal
            ));
        }
        Ok(())
    }

    /// L² inner product through Parseval.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// self += a · other
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.check_same_layout(other)?;
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    /// Text table with one `l k m value` row per coefficient.
    pub fn dump_table(&self) -> String {
        let mut s = String::from("# l k m value\n");
        for (l, k, m, v) in self.entries() {
            let _ = writeln!(s, "{l} {k} {m} {v:.17e}");
        }
        s
    }

    /// Inverse of [`dump_table`](Self::dump_table). The degree is the largest
    /// l present; rows may appear in any order.
    pub fn parse_table(text: &str, zonal: bool) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return input(format!("coefficient table line {}: expected 4 fields", lineno + 1));
            }
            let bad = |what: &str| Error::Input(format!("coefficient table line {}: bad {what}", lineno + 1));
            let l: usize = parts[0].parse().map_err(|_| bad("l"))?;
            let k: usize = parts[1].parse().map_err(|_| bad("k"))?;
            let m: i64 = parts[2].parse().map_err(|_| bad("m"))?;
            let v: f64 = parts[3].parse().map_err(|_| bad("value"))?;
            rows.push((l, k, m, v));
        }
        let degree = rows.iter().map(|r| r.0).max().unwrap_or(0);
        let mut c = Self::zeros(degree, zonal);
        for (l, k, m, v) in rows {
            c.set(l, k, m, v)?;
        }
        Ok(c)
    }
}

/// A point of S³ in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(psi: f64, theta: f64, phi: f64) -> Self {
        Self { psi, theta, phi }
    }

    /// Embedding in ℝ⁴.
    pub fn to_r4(&self) -> [f64; 4] {
        let (sp, cp) = self.psi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        let (sf, cf) = self.phi.sin_cos();
        [sp * st * cf, sp * st * sf, sp * ct, cp]
    }

    pub fn from_r4(xi: [f64; 4]) -> Self {
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        let psi = rho.atan2(xi[3]);
        let theta = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt().atan2(xi[2]);
        let phi = xi[1].atan2(xi[0]);
        Self { psi, theta, phi }
    }
}

/// Normalization constants of the basis up to a fixed degree, computed once
/// by exact quadrature and then frozen.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    degree: usize,
    radial_norm: Vec<f64>,
    angular_norm: Vec<f64>,
    zonal_norm: Vec<f64>,
}

impl HarmonicBasis {
    pub fn new(degree: usize) -> Self {
        let (psi, psi_w) = chebyshev2_polar(degree + 1);
        let mut radial_acc = vec![0.0; tri(degree + 1, 0)];
        let mut zonal_acc = vec![0.0; degree + 1];
        let mut buf = Vec::new();
        for (&p, &w) in psi.iter().zip(&psi_w) {
            let (s, c) = p.sin_cos();
            for k in 0..=degree {
                gegenbauer_scaled_all(k as f64 + 1.0, degree - k, c, &mut buf);
                let sk = s.powi(k as i32);
                for (d, v) in buf.iter().enumerate() {
                    let r = sk * v;
                    radial_acc[tri(k + d, k)] += w * r * r;
                }
            }
            for (l, acc) in zonal_acc.iter_mut().enumerate() {
                let z = ((l as f64 + 1.0) * p).sin() / s;
                *acc += 4.0 * PI * w * z * z;
            }
        }
        let (t, t_w) = gauss_legendre(degree + 1);
        let mut angular_acc = vec![0.0; tri(degree + 1, 0)];
        for (&tj, &wj) in t.iter().zip(&t_w) {
            for m in 0..=degree {
                legendre_normalized_column(m, degree, tj, &mut buf);
                let phi_int = if m == 0 { 2.0 * PI } else { PI };
                for (d, v) in buf.iter().enumerate() {
                    angular_acc[tri(m + d, m)] += wj * v * v * phi_int;
                }
            }
        }
        let inv_sqrt = |v: Vec<f64>| v.into_iter().map(|a| 1.0 / a.sqrt()).collect::<Vec<_>>();
        Self {
            degree,
            radial_norm: inv_sqrt(radial_acc),
            angular_norm: inv_sqrt(angular_acc),
            zonal_norm: inv_sqrt(zonal_acc),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// c_l of the zonal basis Z_l = c_l sin((l+1)ψ)/sin ψ.
    pub fn zonal_constant(&self, l: usize) -> f64 {
        self.zonal_norm[l]
    }

    fn check(&self, c: &HarmonicCoeffs) -> Result<()> {
        if c.degree > self.degree {
            return Err(Error::Resolution {
                degree: c.degree,
                required_psi: 2 * c.degree + 2,
                required_theta: c.degree + 1,
                required_phi: 2 * c.degree + 1,
            });
        }
        Ok(())
    }

    /// Radial factors A_{lk} sin^k ψ C^{k+1}_{l−k}(cos ψ) for l = k..=degree.
    fn radial_column(&self, k: usize, degree: usize, psi: f64, buf: &mut Vec<f64>) {
        let (s, c) = psi.sin_cos();
        gegenbauer_scaled_all(k as f64 + 1.0, degree - k, c, buf);
        let sk = s.powi(k as i32);
        for (d, v) in buf.iter_mut().enumerate() {
            *v *= sk * self.radial_norm[tri(k + d, k)];
        }
    }

    /// Zonal basis values Z_l(ψ), l = 0..=degree, through the Chebyshev-U
    /// recurrence (valid at the poles too).
    fn zonal_column(&self, degree: usize, psi: f64, out: &mut Vec<f64>) {
        out.clear();
        let x = psi.cos();
        let (mut prev, mut cur) = (0.0, 1.0);
        for l in 0..=degree {
            out.push(cur * self.zonal_norm[l]);
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
    }

    /// Σ c_{lkm} Y_{lkm} at one point.
    pub fn evaluate(&self, c: &HarmonicCoeffs, p: SpherePoint) -> Result<f64> {
        self.check(c)?;
        let mut buf = Vec::new();
        if c.zonal {
            self.zonal_column(c.degree, p.psi, &mut buf);
            return Ok(buf.iter().zip(c.as_slice()).map(|(z, v)| z * v).sum());
        }
        let lmax = c.degree;
        let t = p.theta.cos();
        let mut leg = Vec::new();
        let mut total = 0.0;
        // angular factors indexed by (k, |m|)
        let mut ang = vec![0.0; tri(lmax + 1, 0)];
        for m in 0..=lmax {
            legendre_normalized_column(m, lmax, t, &mut leg);
            for (d, v) in leg.iter().enumerate() {
                ang[tri(m + d, m)] = v * self.angular_norm[tri(m + d, m)];
            }
        }
        for k in 0..=lmax {
            self.radial_column(k, lmax, p.psi, &mut buf);
            for m in -(k as i64)..=(k as i64) {
                let mut radial_sum = 0.0;
                for l in k..=lmax {
                    radial_sum += c.data[full_offset(l) + k * k + (m + k as i64) as usize] * buf[l - k];
                }
                if radial_sum == 0.0 {
                    continue;
                }
                let ma = m.unsigned_abs() as usize;
                total += radial_sum * ang[tri(k, ma)] * trig(m, p.phi);
            }
        }
        Ok(total)
    }
}

#[inline]
fn trig(m: i64, phi: f64) -> f64 {
    match m.cmp(&0) {
        std::cmp::Ordering::Greater => (m as f64 * phi).cos(),
        std::cmp::Ordering::Less => ((-m) as f64 * phi).sin(),
        std::cmp::Ordering::Equal => 1.0,
    }
}

/// Product quadrature grid on S³ with tabulated basis values.
///
/// Nodes are stored ψ-major, then θ, then φ. The ψ rule is Gauss–Chebyshev
/// of the second kind (in cos ψ), θ is Gauss–Legendre in cos θ and φ is
/// equispaced. No node sits on either pole.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    degree: usize,
    zonal: bool,
    psi: Vec<f64>,
    psi_w: Vec<f64>,
    theta: Vec<f64>,
    theta_w: Vec<f64>,
    phi: Vec<f64>,
    phi_w: f64,
    weights: Vec<f64>,
    basis: HarmonicBasis,
    radial: Vec<Vec<f64>>,
    angular: Vec<Vec<f64>>,
    trig: Vec<Vec<f64>>,
}

impl SphereGrid {
    /// Grid exact for products of degree-`degree` band-limited functions.
    pub fn new(degree: usize, zonal: bool) -> Result<Self> {
        let (n_theta, n_phi) = if zonal { (1, 1) } else { (degree + 1, 2 * degree + 1) };
        Self::with_resolution(degree, zonal, 2 * degree + 2, n_theta, n_phi)
    }

    pub fn with_resolution(
        degree: usize,
        zonal: bool,
        n_psi: usize,
        n_theta: usize,
        n_phi: usize,
    ) -> Result<Self> {
        let too_coarse = n_psi < 2 * degree + 2
            || (!zonal && (n_theta < degree + 1 || n_phi < 2 * degree + 1));
        if too_coarse {
            return Err(Error::Resolution {
                degree,
                required_psi: 2 * degree + 2,
                required_theta: if zonal { 1 } else { degree + 1 },
                required_phi: if zonal { 1 } else { 2 * degree + 1 },
            });
        }
        if !zonal && degree > MAX_FULL_DEGREE {
            return input(format!(
                "full grids are limited to degree {MAX_FULL_DEGREE}, got {degree}; use a zonal grid"
            ));
        }
        let basis = HarmonicBasis::new(degree);
        let (psi, psi_w) = chebyshev2_polar(n_psi);
        let mut buf = Vec::new();

        if zonal {
            let mut radial = vec![vec![0.0; n_psi]; degree + 1];
            for (i, &p) in psi.iter().enumerate() {
                let s = p.sin();
                for (l, row) in radial.iter_mut().enumerate() {
                    row[i] = basis.zonal_norm[l] * ((l as f64 + 1.0) * p).sin() / s;
                }
            }
            let weights = psi_w.iter().map(|w| 4.0 * PI * w).collect();
            return Ok(Self {
                degree,
                zonal,
                psi,
                psi_w,
                theta: vec![PI / 2.0],
                theta_w: vec![2.0],
                phi: vec![0.0],
                phi_w: 2.0 * PI,
                weights,
                basis,
                radial,
                angular: Vec::new(),
                trig: Vec::new(),
            });
        }

        let mut radial = vec![vec![0.0; n_psi]; tri(degree + 1, 0)];
        for (i, &p) in psi.iter().enumerate() {
            for k in 0..=degree {
                basis.radial_column(k, degree, p, &mut buf);
                for (d, v) in buf.iter().enumerate() {
                    radial[tri(k + d, k)][i] = *v;
                }
            }
        }
        let (t, theta_w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = t.iter().map(|x| x.acos()).collect();
        let mut angular = vec![vec![0.0; n_theta]; tri(degree + 1, 0)];
        for (j, &tj) in t.iter().enumerate() {
            for m in 0..=degree {
                legendre_normalized_column(m, degree, tj, &mut buf);
                for (d, v) in buf.iter().enumerate() {
                    angular[tri(m + d, m)][j] = v * basis.angular_norm[tri(m + d, m)];
                }
            }
        }
        let phi: Vec<f64> = (0..n_phi).map(|p| 2.0 * PI * p as f64 / n_phi as f64).collect();
        let phi_w = 2.0 * PI / n_phi as f64;
        let trig_table = (-(degree as i64)..=(degree as i64))
            .map(|m| phi.iter().map(|&f| trig(m, f)).collect())
            .collect();
        let mut weights = Vec::with_capacity(n_psi * n_theta * n_phi);
        for wp in &psi_w {
            for wt in &theta_w {
                for _ in 0..n_phi {
                    weights.push(wp * wt * phi_w);
                }
            }
        }
        Ok(Self {
            degree,
            zonal,
            psi,
            psi_w,
            theta,
            theta_w,
            phi,
            phi_w,
            weights,
            basis,
            radial,
            angular,
            trig: trig_table,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zonal(&self) -> bool {
        self.zonal
    }

    pub fn n_psi(&self) -> usize {
        self.psi.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Quadrature weight of every node, in units of S³ volume.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn basis(&self) -> &HarmonicBasis {
        &self.basis
    }

    pub fn node(&self, idx: usize) -> SpherePoint {
        let per_psi = self.theta.len() * self.phi.len();
        let i = idx / per_psi;
        let rem = idx % per_psi;
        let j = rem / self.phi.len();
        let p = rem % self.phi.len();
        SpherePoint::new(self.psi[i], self.theta[j], self.phi[p])
    }

    pub fn nodes(&self) -> Vec<SpherePoint> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.degree {
            return Err(Error::Resolution {
                degree,
                required_psi: 2 * degree + 2,
                required_theta: if self.zonal { 1 } else { degree + 1 },
                required_phi: if self.zonal { 1 } else { 2 * degree + 1 },
            });
        }
        Ok(())
    }

    /// Grid values of Σ c_{lkm} Y_{lkm}.
    pub fn synthesize(&self, c: &HarmonicCoeffs) -> Result<Vec<f64>> {
        self.check_degree(c.degree)?;
        if self.zonal {
            if !c.zonal {
                return input("full coefficients cannot be synthesized on a zonal grid");
            }
            let mut f = vec![0.0; self.psi.len()];
            for (l, cl) in c.data.iter().enumerate() {
                if *cl == 0.0 {
                    continue;
                }
                for (fi, z) in f.iter_mut().zip(&self.radial[l]) {
                    *fi += cl * z;
                }
            }
            return Ok(f);
        }
        let full;
        let c = if c.zonal {
            full = c.to_full();
            &full
        } else {
            c
        };
        let lc = c.degree;
        let (n_psi, n_theta, n_phi) = (self.psi.len(), self.theta.len(), self.phi.len());
        let big = self.degree as i64;

        // ψ stage: g[(k, m)][i]
        let mut g = vec![vec![0.0; n_psi]; (lc + 1) * (lc + 1)];
        for k in 0..=lc {
            for m in -(k as i64)..=(k as i64) {
                let row = &mut g[k * k + (m + k as i64) as usize];
                for l in k..=lc {
                    let cv = c.data[full_offset(l) + k * k + (m + k as i64) as usize];
                    if cv == 0.0 {
                        continue;
                    }
                    for (gi, r) in row.iter_mut().zip(&self.radial[tri(l, k)]) {
                        *gi += cv * r;
                    }
                }
            }
        }
        // θ stage: h[m][i][j]
        let mut h = vec![vec![0.0; n_psi * n_theta]; 2 * lc + 1];
        for m in -(lc as i64)..=(lc as i64) {
            let ma = m.unsigned_abs() as usize;
            let hm = &mut h[(m + lc as i64) as usize];
            for k in ma..=lc {
                let gk = &g[k * k + (m + k as i64) as usize];
                let ang = &self.angular[tri(k, ma)];
                for i in 0..n_psi {
                    let gi = gk[i];
                    if gi == 0.0 {
                        continue;
                    }
                    let out = &mut hm[i * n_theta..(i + 1) * n_theta];
                    for (o, a) in out.iter_mut().zip(ang) {
                        *o += gi * a;
                    }
                }
            }
        }
        // φ stage
        let mut f = vec![0.0; n_psi * n_theta * n_phi];
        for m in -(lc as i64)..=(lc as i64) {
            let hm = &h[(m + lc as i64) as usize];
            let tr = &self.trig[(m + big) as usize];
            for (ij, hv) in hm.iter().enumerate() {
                if *hv == 0.0 {
                    continue;
                }
                let out = &mut f[ij * n_phi..(ij + 1) * n_phi];
                for (o, t) in out.iter_mut().zip(tr) {
                    *o += hv * t;
                }
            }
        }
        Ok(f)
    }

    /// Coefficients c_{lkm} = ∫ f Y_{lkm} dV₀ by quadrature, up to `degree`.
    pub fn analyze(&self, f: &[f64], degree: usize) -> Result<HarmonicCoeffs> {
        self.check_degree(degree)?;
        if f.len() != self.len() {
            return input(format!(
                "grid has {} nodes, got {} values",
                self.len(),
                f.len()
            ));
        }
        if self.zonal {
            let mut c = HarmonicCoeffs::zeros(degree, true);
            for (l, cl) in c.data.iter_mut().enumerate() {
                *cl = self
                    .radial[l]
                    .iter()
                    .zip(f)
                    .zip(&self.weights)
                    .map(|((z, v), w)| z * v * w)
                    .sum();
            }
            return Ok(c);
        }
        let (n_psi, n_theta, n_phi) = (self.psi.len(), self.theta.len(), self.phi.len());
        let big = self.degree as i64;
        let lc = degree;
        // φ stage
        let mut h = vec![vec![0.0; n_psi * n_theta]; 2 * lc + 1];
        for m in -(lc as i64)..=(lc as i64) {
            let tr = &self.trig[(m + big) as usize];
            let hm = &mut h[(m + lc as i64) as usize];
            for (ij, out) in hm.iter_mut().enumerate() {
                let vals = &f[ij * n_phi..(ij + 1) * n_phi];
                *out = self.phi_w * vals.iter().zip(tr).map(|(v, t)| v * t).sum::<f64>();
            }
        }
        // θ stage
        let mut g = vec![vec![0.0; n_psi]; (lc + 1) * (lc + 1)];
        for k in 0..=lc {
            for m in -(k as i64)..=(k as i64) {
                let ma = m.unsigned_abs() as usize;
                let ang = &self.angular[tri(k, ma)];
                let hm = &h[(m + lc as i64) as usize];
                let row = &mut g[k * k + (m + k as i64) as usize];
                for (i, gi) in row.iter_mut().enumerate() {
                    let line = &hm[i * n_theta..(i + 1) * n_theta];
                    *gi = line
                        .iter()
                        .zip(ang)
                        .zip(&self.theta_w)
                        .map(|((v, a), w)| v * a * w)
                        .sum();
                }
            }
        }
        // ψ stage
        let mut c = HarmonicCoeffs::zeros(lc, false);
        for l in 0..=lc {
            for k in 0..=l {
                let r = &self.radial[tri(l, k)];
                for m in -(k as i64)..=(k as i64) {
                    let gk = &g[k * k + (m + k as i64) as usize];
                    c.data[full_offset(l) + k * k + (m + k as i64) as usize] = gk
                        .iter()
                        .zip(r)
                        .zip(&self.psi_w)
                        .map(|((gv, rv), w)| gv * rv * w)
                        .sum();
                }
            }
        }
        Ok(c)
    }

    /// Σ wᵢ fᵢ
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// (1/|S³|) Σ wᵢ fᵢ
    pub fn mean_value(&self, f: &[f64]) -> f64 {
        self.integrate(f) / S3_AREA
    }

    /// Evaluates the expansion at an arbitrary point of S³.
    pub fn evaluate(&self, c: &HarmonicCoeffs, p: SpherePoint) -> Result<f64> {
        self.basis.evaluate(c, p)
    }
}

/// Shorthand for [`SphereGrid::new`].
pub fn make_grid(degree: usize, zonal: bool) -> Result<SphereGrid> {
    SphereGrid::new(degree, zonal)
}

/// Shorthand for [`SphereGrid::synthesize`].
pub fn synthesize(c: &HarmonicCoeffs, grid: &SphereGrid) -> Result<Vec<f64>> {
    grid.synthesize(c)
}

/// Shorthand for [`SphereGrid::analyze`].
pub fn analyze(f: &[f64], grid: &SphereGrid, degree: usize) -> Result<HarmonicCoeffs> {
    grid.analyze(f, degree)
}

/// Shorthand for [`SphereGrid::mean_value`].
pub fn mean_value(f: &[f64], grid: &SphereGrid) -> f64 {
    grid.mean_value(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn layout_sizes_and_indexing() {
        assert_eq!(HarmonicCoeffs::len_for(3, false), 1 + 4 + 9 + 16);
        assert_eq!(HarmonicCoeffs::len_for(3, true), 4);
        let c = HarmonicCoeffs::zeros(4, false);
        let entries = c.entries();
        for (idx, (l, k, m, _)) in entries.iter().enumerate() {
            assert_eq!(c.index(*l, *k, *m), Some(idx));
        }
        assert_eq!(c.index(2, 3, 0), None);
        assert_eq!(c.slot_degrees().len(), c.len());
    }

    #[test]
    fn grid_weights_sum_to_area_and_avoid_poles() {
        for &(l, z) in &[(0, true), (0, false), (8, false), (5, true)] {
            let g = make_grid(l, z).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert!((total - S3_AREA).abs() < 1e-12 * S3_AREA);
            for p in g.nodes() {
                assert!(p.psi > 0.0 && p.psi < PI);
            }
        }
        let z = make_grid(3, true).unwrap();
        assert_eq!((z.n_theta(), z.n_phi()), (1, 1));
    }

    #[test]
    fn constant_coefficient_synthesizes_constant() {
        let g = make_grid(4, false).unwrap();
        let c = HarmonicCoeffs::unit(4, false, 0, 0, 0).unwrap();
        let f = g.synthesize(&c).unwrap();
        let want = 1.0 / S3_AREA.sqrt();
        assert!(f.iter().all(|v| (v - want).abs() < 1e-14));
        let zero = g.synthesize(&HarmonicCoeffs::zeros(4, false)).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zonal_degree_one_is_cosine() {
        let g = make_grid(6, true).unwrap();
        let c = HarmonicCoeffs::unit(6, true, 1, 0, 0).unwrap();
        let f = g.synthesize(&c).unwrap();
        let cl = g.basis().zonal_constant(1);
        for (p, v) in g.nodes().iter().zip(&f) {
            assert!((v - cl * 2.0 * p.psi.cos()).abs() < 1e-13);
        }
        assert!((cl - 1.0 / S3_AREA.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn analyze_constant_and_single_modes() {
        let g = make_grid(8, false).unwrap();
        let ones = vec![1.0; g.len()];
        let c = g.analyze(&ones, 8).unwrap();
        assert!((c.get(0, 0, 0) - S3_AREA.sqrt()).abs() < 1e-12);
        assert!(c.as_slice()[1..].iter().all(|v| v.abs() < 1e-12));

        let y3 = HarmonicCoeffs::unit(8, false, 3, 0, 0).unwrap();
        let c3 = g.analyze(&g.synthesize(&y3).unwrap(), 8).unwrap();
        for (l, k, m, v) in c3.entries() {
            let want = if (l, k, m) == (3, 0, 0) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "({l},{k},{m}) {v}");
        }

        let y211 = HarmonicCoeffs::unit(8, false, 2, 1, 1).unwrap();
        let f = g.synthesize(&y211).unwrap();
        let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
        assert!((g.integrate(&sq) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn round_trip_random_full_and_zonal() {
        let mut seed = 7u64;
        let g = make_grid(12, false).unwrap();
        let mut c = HarmonicCoeffs::zeros(12, false);
        for v in c.as_mut_slice() {
            *v = lcg(&mut seed);
        }
        let f = g.synthesize(&c).unwrap();
        let back = g.analyze(&f, 12).unwrap();
        let scale = c.norm_sq().sqrt();
        for (a, b) in c.as_slice().iter().zip(back.as_slice()) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
        let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
        assert!((g.integrate(&sq) - c.norm_sq()).abs() < 1e-10 * c.norm_sq());

        let gz = make_grid(200, true).unwrap();
        let mut cz = HarmonicCoeffs::zeros(200, true);
        for v in cz.as_mut_slice() {
            *v = lcg(&mut seed);
        }
        let backz = gz.analyze(&gz.synthesize(&cz).unwrap(), 200).unwrap();
        for (a, b) in cz.as_slice().iter().zip(backz.as_slice()) {
            assert!((a - b).abs() < 1e-10 * cz.norm_sq().sqrt());
        }
    }

    #[test]
    fn mean_values() {
        let g = make_grid(6, false).unwrap();
        assert!((g.mean_value(&vec![5.0; g.len()]) - 5.0).abs() < 1e-13);
        let y1 = g.synthesize(&HarmonicCoeffs::unit(6, false, 1, 0, 0).unwrap()).unwrap();
        assert!(g.mean_value(&y1).abs() < 1e-12);
        let y2 = g.synthesize(&HarmonicCoeffs::unit(6, false, 2, 0, 0).unwrap()).unwrap();
        let shifted: Vec<f64> = y2.iter().map(|v| 1.0 + v).collect();
        assert!((g.mean_value(&shifted) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn refuses_underresolved_transforms() {
        let g = make_grid(4, false).unwrap();
        let c = HarmonicCoeffs::zeros(5, false);
        match g.synthesize(&c) {
            Err(Error::Resolution { required_psi, .. }) => assert_eq!(required_psi, 12),
            other => panic!("expected resolution error, got {other:?}"),
        }
        assert!(g.analyze(&vec![0.0; g.len()], 5).is_err());
        assert!(SphereGrid::with_resolution(4, false, 9, 5, 9).is_err());
        let z = make_grid(4, true).unwrap();
        assert!(z.synthesize(&HarmonicCoeffs::zeros(4, false)).is_err());
    }

    #[test]
    fn point_evaluation_matches_grid_synthesis() {
        let mut seed = 99u64;
        let g = make_grid(7, false).unwrap();
        let mut c = HarmonicCoeffs::zeros(7, false);
        for v in c.as_mut_slice() {
            *v = lcg(&mut seed);
        }
        let f = g.synthesize(&c).unwrap();
        for idx in (0..g.len()).step_by(97) {
            let v = g.evaluate(&c, g.node(idx)).unwrap();
            assert!((v - f[idx]).abs() < 1e-12);
        }
        let cz = HarmonicCoeffs::from_vec(3, true, vec![0.1, -0.4, 0.7, 0.2]).unwrap();
        let gz = make_grid(3, true).unwrap();
        let fz = gz.synthesize(&cz).unwrap();
        for idx in 0..gz.len() {
            let v = gz.evaluate(&cz, gz.node(idx)).unwrap();
            assert!((v - fz[idx]).abs() < 1e-13);
        }
    }

    #[test]
    fn dump_table_round_trip() {
        let c = HarmonicCoeffs::from_vec(2, false, (0..14).map(|i| i as f64 * 0.25 - 1.0).collect())
            .unwrap();
        let text = c.dump_table();
        let mut lines = text.lines().skip(1);
        assert_eq!(lines.next().unwrap().split_whitespace().take(3).collect::<Vec<_>>(), ["0", "0", "0"]);
        assert_eq!(lines.next().unwrap().split_whitespace().take(3).collect::<Vec<_>>(), ["1", "0", "0"]);
        assert_eq!(lines.next().unwrap().split_whitespace().take(3).collect::<Vec<_>>(), ["1", "1", "-1"]);
        assert_eq!(HarmonicCoeffs::parse_table(&text, false).unwrap(), c);
        assert!(HarmonicCoeffs::parse_table("1 2 0 3.0", false).is_err());
    }

    #[test]
    fn sphere_point_round_trip() {
        let p = SpherePoint::new(1.1, 0.4, -2.0);
        let q = SpherePoint::from_r4(p.to_r4());
        assert!((p.psi - q.psi).abs() < 1e-14);
        assert!((p.theta - q.theta).abs() < 1e-14);
        assert!((p.phi - q.phi).abs() < 1e-14);
    }
}
