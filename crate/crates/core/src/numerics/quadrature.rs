use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::{Error, Result};

/// Integration interval and stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub lower: f64,
    pub upper: f64,
    /// Absolute error target for the whole interval.
    pub tolerance: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(lower: f64, upper: f64, tolerance: f64) -> Result<Self> {
        let spec = Self {
            lower,
            upper,
            tolerance,
            max_subdivisions: 2000,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_max_subdivisions(mut self, max: usize) -> Self {
        self.max_subdivisions = max;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::Domain(format!(
                "quadrature bounds must satisfy lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub subdivisions: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Number of equal pieces the interval is split into before adapting.
const INITIAL_PIECES: usize = 8;

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Piece {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).norm(),
    }
}

/// Adaptive Gauss-Kronrod integration of a complex-valued integrand.
///
/// The piece with the largest error estimate is bisected until the summed
/// estimate drops below `spec.tolerance`.
pub fn integrate<F>(f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    let width = (spec.upper - spec.lower) / INITIAL_PIECES as f64;
    let mut heap: BinaryHeap<Piece> = (0..INITIAL_PIECES)
        .map(|i| {
            let a = spec.lower + width * i as f64;
            let b = if i + 1 == INITIAL_PIECES { spec.upper } else { a + width };
            kronrod(&f, a, b)
        })
        .collect();
    let mut subdivisions = 0;
    loop {
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= spec.tolerance {
            return Ok(Integral {
                value: sum_pieces(&heap),
                error,
                subdivisions,
            });
        }
        let value = sum_pieces(&heap);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Accuracy {
                estimate: value,
                error,
                tolerance: spec.tolerance,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
        subdivisions += 1;
    }
}

/// Sum in interval order so results do not depend on heap layout.
fn sum_pieces(heap: &BinaryHeap<Piece>) -> Complex64 {
    let mut pieces: Vec<&Piece> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    pieces.iter().map(|p| p.value).sum()
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), spec).map(|i| i.value.re)
}
