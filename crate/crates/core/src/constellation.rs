//! Finite-alphabet constellation generators and geometry operations.
//!
//! Generators emit *unnormalized* geometry (integer grid levels, raw ring
//! radii); the rate pipeline calls [`Constellation::normalize`] before any
//! mutual-information computation so that "same power per user" means the
//! same thing across families. Rotation multiplies every point by `e^{jθ}`
//! and therefore preserves energy and pairwise distances.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Scalar};
use crate::{Error, Result};

/// Constellation family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    SquareQam,
    CrossQam,
    HexQam,
    StarQam,
    Apsk,
    Custom,
}

impl Family {
    /// Canonical lowercase label used in JSON and CLI output.
    pub fn label(&self) -> &'static str {
        match self {
            Family::SquareQam => "square_qam",
            Family::CrossQam => "cross_qam",
            Family::HexQam => "hex_qam",
            Family::StarQam => "star_qam",
            Family::Apsk => "apsk",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "sqam" | "qam" | "square_qam" => Ok(Family::SquareQam),
            "cross" | "xqam" | "cross_qam" => Ok(Family::CrossQam),
            "hex" | "hqam" | "hex_qam" => Ok(Family::HexQam),
            "star" | "starqam" | "star_qam" => Ok(Family::StarQam),
            "apsk" => Ok(Family::Apsk),
            "custom" => Ok(Family::Custom),
            other => Err(Error::InvalidInput(format!(
                "unknown constellation family '{other}' \
                 (expected square|xqam|hqam|star|apsk|custom)"
            ))),
        }
    }
}

/// Concentric-ring layout for star-QAM and APSK.
///
/// Radii are relative (pre-normalization) and strictly increasing; each ring
/// carries `points_per_ring[i]` equally spaced points starting at phase
/// `phase_offsets[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSpec<T> {
    radii: Vec<T>,
    points_per_ring: Vec<usize>,
    phase_offsets: Vec<T>,
}

impl<T: Scalar> RingSpec<T> {
    pub fn new(radii: Vec<T>, points_per_ring: Vec<usize>, phase_offsets: Vec<T>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidRingSpec("no rings given".into()));
        }
        if radii.len() != points_per_ring.len() || radii.len() != phase_offsets.len() {
            return Err(Error::InvalidRingSpec(format!(
                "mismatched lengths: {} radii, {} point counts, {} phase offsets",
                radii.len(),
                points_per_ring.len(),
                phase_offsets.len()
            )));
        }
        if radii[0] <= T::zero() {
            return Err(Error::InvalidRingSpec("radii must be positive".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidRingSpec(
                "radii must be strictly increasing".into(),
            ));
        }
        if points_per_ring.iter().any(|&n| n == 0) {
            return Err(Error::InvalidRingSpec(
                "every ring must hold at least one point".into(),
            ));
        }
        if phase_offsets.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidRingSpec("phase offsets must be finite".into()));
        }
        Ok(RingSpec {
            radii,
            points_per_ring,
            phase_offsets,
        })
    }

    /// Default star-QAM layout for `m = 8c` points: `c` rings of 8 points,
    /// radii extended geometrically with ratio 2 (1, 2, 4, ...), zero phase
    /// offsets.
    pub fn star_default(m: usize) -> Result<Self> {
        if m == 0 || m % 8 != 0 {
            return Err(Error::InvalidRingSpec(format!(
                "star-QAM needs a multiple of 8 points, got {m}"
            )));
        }
        let rings = m / 8;
        let radii = (0..rings).map(|i| lit::<T>(f64::powi(2.0, i as i32))).collect();
        Ok(RingSpec {
            radii,
            points_per_ring: vec![8; rings],
            phase_offsets: vec![T::zero(); rings],
        })
    }

    /// Default APSK layouts: 16-APSK as 4+12 rings at radius ratio 2.57 with
    /// the inner ring offset by π/4; 32-APSK as 4+12+16 rings at ratios
    /// 1 : 2.53 : 4.30 with offsets π/4, π/12, 0. These follow common
    /// satellite-broadcast geometries; other orders need an explicit spec.
    pub fn apsk_default(m: usize) -> Result<Self> {
        let quarter_pi = T::FRAC_PI_4();
        match m {
            16 => Ok(RingSpec {
                radii: vec![T::one(), lit(2.57)],
                points_per_ring: vec![4, 12],
                phase_offsets: vec![quarter_pi, T::zero()],
            }),
            32 => Ok(RingSpec {
                radii: vec![T::one(), lit(2.53), lit(4.30)],
                points_per_ring: vec![4, 12, 16],
                phase_offsets: vec![quarter_pi, T::PI() / lit(12.0), T::zero()],
            }),
            other => Err(Error::InvalidRingSpec(format!(
                "no default APSK layout for {other} points (defaults exist for 16 and 32); \
                 pass an explicit ring spec"
            ))),
        }
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn points_per_ring(&self) -> &[usize] {
        &self.points_per_ring
    }

    pub fn phase_offsets(&self) -> &[T] {
        &self.phase_offsets
    }

    pub fn total_points(&self) -> usize {
        self.points_per_ring.iter().sum()
    }
}

/// An ordered finite alphabet of complex constellation points.
///
/// Invariants maintained by every constructor:
/// * at least one point, all points finite and pairwise distinct;
/// * if `normalized` is set, average energy is 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    name: String,
    points: Vec<Complex<T>>,
    family: Family,
    normalized: bool,
    rotation: T,
}

impl<T: Scalar> Constellation<T> {
    fn from_parts(
        name: String,
        points: Vec<Complex<T>>,
        family: Family,
        normalized: bool,
        rotation: T,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput(format!(
                "constellation '{name}' has no points"
            )));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "constellation '{name}' contains non-finite points"
            )));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidInput(format!(
                        "constellation '{name}' has coincident points at indices {i} and {j}"
                    )));
                }
            }
        }
        Ok(Constellation {
            name,
            points,
            family,
            normalized,
            rotation,
        })
    }

    /// Wraps an arbitrary point set as a `Custom` constellation.
    pub fn custom(name: impl Into<String>, points: Vec<Complex<T>>) -> Result<Self> {
        Self::from_parts(name.into(), points, Family::Custom, false, T::zero())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Accumulated rotation in radians (0 if never rotated).
    pub fn rotation(&self) -> T {
        self.rotation
    }

    /// Alphabet cardinality M.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Average symbol energy `(1/M) Σ |x|²`.
    pub fn average_energy(&self) -> T {
        let sum = self
            .points
            .iter()
            .fold(T::zero(), |acc, p| acc + p.norm_sqr());
        sum / lit(self.points.len() as f64)
    }

    /// Minimum pairwise Euclidean distance. Needs at least two points.
    pub fn min_distance(&self) -> Result<T> {
        if self.points.len() < 2 {
            return Err(Error::InvalidInput(
                "min_distance needs at least two points".into(),
            ));
        }
        let mut best = T::infinity();
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let d = (self.points[i] - self.points[j]).norm();
                if d < best {
                    best = d;
                }
            }
        }
        Ok(best)
    }

    /// Scales the points to unit average energy. Idempotent: an input whose
    /// `normalized` flag is already set is returned unchanged.
    pub fn normalize(&self) -> Result<Self> {
        if self.normalized {
            return Ok(self.clone());
        }
        let energy = self.average_energy();
        if energy <= T::zero() {
            return Err(Error::DegenerateEnergy);
        }
        let scale = energy.sqrt().recip();
        let points = self.points.iter().map(|p| p * scale).collect();
        Ok(Constellation {
            name: self.name.clone(),
            points,
            family: self.family,
            normalized: true,
            rotation: self.rotation,
        })
    }

    /// Rotates every point by `e^{jθ}` and accumulates θ into the rotation
    /// field. Energy and pairwise distances are preserved; a zero angle
    /// returns the input bit-for-bit.
    pub fn rotate(&self, theta: T) -> Self {
        let phasor = Complex::new(theta.cos(), theta.sin());
        Constellation {
            name: self.name.clone(),
            points: self.points.iter().map(|p| p * phasor).collect(),
            family: self.family,
            normalized: self.normalized,
            rotation: self.rotation + theta,
        }
    }

    /// Serializes to the interchange JSON format
    /// `{"name", "family", "points": [[re, im], ...], "normalized", "rotation"}`.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&ConstellationJson::from_constellation(self))
            .expect("finite constellation serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&ConstellationJson::from_constellation(self))
            .expect("finite constellation serializes")
    }

    /// Parses the interchange JSON format, re-validating every invariant.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ConstellationJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidInput(format!("bad constellation JSON: {e}")))?;
        raw.into_constellation()
    }
}

#[derive(Serialize, Deserialize)]
struct ConstellationJson {
    name: String,
    family: String,
    points: Vec<[f64; 2]>,
    normalized: bool,
    rotation: f64,
}

impl ConstellationJson {
    fn from_constellation<T: Scalar>(c: &Constellation<T>) -> Self {
        ConstellationJson {
            name: c.name.clone(),
            family: c.family.label().to_string(),
            points: c
                .points
                .iter()
                .map(|p| [p.re.to_f64().unwrap(), p.im.to_f64().unwrap()])
                .collect(),
            normalized: c.normalized,
            rotation: c.rotation.to_f64().unwrap(),
        }
    }

    fn into_constellation<T: Scalar>(self) -> Result<Constellation<T>> {
        let family = Family::from_str(&self.family)?;
        let points = self
            .points
            .iter()
            .map(|&[re, im]| Complex::new(lit::<T>(re), lit::<T>(im)))
            .collect();
        let c = Constellation::from_parts(
            self.name,
            points,
            family,
            self.normalized,
            lit(self.rotation),
        )?;
        if c.normalized {
            let energy = c.average_energy().to_f64().unwrap();
            if (energy - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "constellation claims normalized but average energy is {energy}"
                )));
            }
        }
        Ok(c)
    }
}

/// Square `√M × √M` QAM on odd-integer levels `{±1, ±3, ...}`, unnormalized.
/// Admissible orders are the even powers of two: 4, 16, 64, 256, ...
pub fn gen_square_qam<T: Scalar>(m: usize) -> Result<Constellation<T>> {
    if m < 4 || !m.is_power_of_two() || m.trailing_zeros() % 2 != 0 {
        return Err(Error::InvalidOrder {
            family: "square QAM",
            m,
            expected: "4, 16, 64, 256, ... (even powers of 2)",
        });
    }
    let side = (m as f64).sqrt() as usize;
    let levels: Vec<i64> = (0..side).map(|i| 2 * i as i64 - (side as i64 - 1)).collect();
    let mut points = Vec::with_capacity(m);
    for &im in levels.iter().rev() {
        for &re in &levels {
            points.push(Complex::new(lit::<T>(re as f64), lit::<T>(im as f64)));
        }
    }
    Constellation::from_parts(
        format!("{m}-QAM"),
        points,
        Family::SquareQam,
        false,
        T::zero(),
    )
}

/// Cross QAM for odd powers of two, `M = 2^(2k+1)` with `k ≥ 2`
/// (32, 128, 512, ...): the `(3·2^(k-1))`-wide odd-integer grid with a
/// `2^(k-2) × 2^(k-2)` block of levels removed from each corner. For M = 32
/// this is the 6×6 grid on `{±1, ±3, ±5}` minus the four `(±5, ±5j)` corners.
pub fn gen_cross_qam<T: Scalar>(m: usize) -> Result<Constellation<T>> {
    if m < 32 || !m.is_power_of_two() || m.trailing_zeros() % 2 != 1 {
        return Err(Error::InvalidOrder {
            family: "cross QAM",
            m,
            expected: "32, 128, 512, ... (2^(2k+1), k >= 2)",
        });
    }
    let k = (m.trailing_zeros() as usize - 1) / 2;
    let side = 3 << (k - 1);
    let cut = 1usize << (k.saturating_sub(2));
    // Levels with |re| and |im| both above this belong to a cut corner.
    let keep_below = (side - 1) as i64 - 2 * cut as i64;
    let levels: Vec<i64> = (0..side).map(|i| 2 * i as i64 - (side as i64 - 1)).collect();
    let mut points = Vec::with_capacity(m);
    for &im in levels.iter().rev() {
        for &re in &levels {
            if re.abs() > keep_below && im.abs() > keep_below {
                continue;
            }
            points.push(Complex::new(lit::<T>(re as f64), lit::<T>(im as f64)));
        }
    }
    debug_assert_eq!(points.len(), m);
    Constellation::from_parts(
        format!("{m}-XQAM"),
        points,
        Family::CrossQam,
        false,
        T::zero(),
    )
}

/// Regular hexagonal QAM: `L × L` points (`M = L²`, `L ≥ 2`) with horizontal
/// pitch `2d` within a row, vertical pitch `√3·d` between rows, and every
/// odd-indexed row shifted right by `d`. The result is re-centered so its
/// centroid sits at the origin, which keeps rotation well-behaved.
pub fn gen_hex_qam<T: Scalar>(m: usize, d: T) -> Result<Constellation<T>> {
    let side = (m as f64).sqrt().round() as usize;
    if side < 2 || side * side != m {
        return Err(Error::InvalidOrder {
            family: "hexagonal QAM",
            m,
            expected: "L*L with integer L >= 2 (4, 9, 16, 25, ...)",
        });
    }
    if d <= T::zero() {
        return Err(Error::InvalidInput(format!("spacing d must be positive, got {d}")));
    }
    let row_pitch = lit::<T>(3.0).sqrt() * d;
    let two_d = d + d;
    let mut points = Vec::with_capacity(m);
    for row in 0..side {
        let y = row_pitch * lit(row as f64);
        let shift = if row % 2 == 1 { d } else { T::zero() };
        for col in 0..side {
            let x = two_d * lit(col as f64) + shift;
            points.push(Complex::new(x, y));
        }
    }
    let inv_m = lit::<T>(1.0 / m as f64);
    let centroid = points
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p)
        * inv_m;
    for p in &mut points {
        *p -= centroid;
    }
    Constellation::from_parts(
        format!("{m}-HQAM"),
        points,
        Family::HexQam,
        false,
        T::zero(),
    )
}

/// Star QAM: `M/8` concentric 8-point PSK rings with phases `nπ/4` plus the
/// ring's phase offset. With no explicit spec the default ring layout of
/// [`RingSpec::star_default`] is used (radius ratio 2 between rings).
pub fn gen_star_qam<T: Scalar>(m: usize, ring: Option<&RingSpec<T>>) -> Result<Constellation<T>> {
    if m == 0 || m % 8 != 0 {
        return Err(Error::InvalidRingSpec(format!(
            "star-QAM needs a multiple of 8 points, got {m}"
        )));
    }
    let default_spec;
    let spec = match ring {
        Some(s) => s,
        None => {
            default_spec = RingSpec::star_default(m)?;
            &default_spec
        }
    };
    if spec.points_per_ring.iter().any(|&n| n != 8) {
        return Err(Error::InvalidRingSpec(
            "star-QAM rings must hold exactly 8 points each".into(),
        ));
    }
    if spec.total_points() != m {
        return Err(Error::InvalidRingSpec(format!(
            "ring spec holds {} points but m = {m}",
            spec.total_points()
        )));
    }
    let points = ring_points(spec);
    Constellation::from_parts(
        format!("{m}-SQAM"),
        points,
        Family::StarQam,
        false,
        T::zero(),
    )
}

/// APSK: concentric rings with per-ring point counts, radii and phase
/// offsets. Defaults exist for M = 16 and M = 32 ([`RingSpec::apsk_default`]);
/// any other order requires an explicit ring spec summing to M.
pub fn gen_apsk<T: Scalar>(m: usize, ring: Option<&RingSpec<T>>) -> Result<Constellation<T>> {
    let default_spec;
    let spec = match ring {
        Some(s) => s,
        None => {
            default_spec = RingSpec::apsk_default(m)?;
            &default_spec
        }
    };
    if spec.total_points() != m {
        return Err(Error::InvalidRingSpec(format!(
            "ring spec holds {} points but m = {m}",
            spec.total_points()
        )));
    }
    let points = ring_points(spec);
    Constellation::from_parts(format!("{m}-APSK"), points, Family::Apsk, false, T::zero())
}

fn ring_points<T: Scalar>(spec: &RingSpec<T>) -> Vec<Complex<T>> {
    let mut points = Vec::with_capacity(spec.total_points());
    for (i, (&count, &radius)) in spec
        .points_per_ring
        .iter()
        .zip(spec.radii.iter())
        .enumerate()
    {
        let offset = spec.phase_offsets[i];
        let step = lit::<T>(2.0) * T::PI() / lit(count as f64);
        for n in 0..count {
            let phase = offset + step * lit(n as f64);
            points.push(Complex::new(radius * phase.cos(), radius * phase.sin()));
        }
    }
    points
}
