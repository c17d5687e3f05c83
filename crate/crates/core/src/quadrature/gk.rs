use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{IntegralResult, QuadratureSpec};
use crate::{Error, Result};

// Kronrod 21-point abscissae; odd indices are the embedded 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 21 Kronrod nodes on `[a, b]`, in the order used by [`rule`].
pub(crate) fn nodes(a: f64, b: f64) -> [f64; 21] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [center; 21];
    for j in 0..10 {
        out[2 * j] = center - half * XGK[j];
        out[2 * j + 1] = center + half * XGK[j];
    }
    out
}

/// Kronrod weights matching [`nodes`], scaled to `[a, b]`.
pub(crate) fn weights(a: f64, b: f64) -> [f64; 21] {
    let half = 0.5 * (b - a);
    let mut out = [WGK[10] * half; 21];
    for j in 0..10 {
        out[2 * j] = WGK[j] * half;
        out[2 * j + 1] = WGK[j] * half;
    }
    out
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    side: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // largest error first; ties resolved toward the older panel
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

/// One Gauss–Kronrod 10/21 panel. Returns `(value, error, side)` where
/// `side` is the Kronrod estimate of the integral of the second component.
fn rule<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<(f64, f64)> {
        let (v, s) = f(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("x = {x}")));
        }
        Ok((v, s))
    };
    let (fc, sc) = eval(center)?;
    let mut res_k = WGK[10] * fc;
    let mut side = WGK[10] * sc;
    let mut res_g = 0.0;
    let mut resabs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, s1) = eval(center - dx)?;
        let (f2, s2) = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        side += WGK[j] * (s1 + s2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let err = rescale_error((res_k - res_g) * half, resabs * h, resasc * h);
    Ok((res_k * half, err, side * half))
}

/// Global adaptive integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// error meets `spec` or `max_subdivisions` panels exist. Panels are summed
/// left to right at the end, so the result is bit-stable for a given input.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_side(|x| Ok((f(x)?, 0.0)), a, b, spec).map(|(r, _)| r)
}

/// Like [`integrate`], for an integrand that also carries a secondary
/// quantity (typically an inner error density). The secondary component is
/// integrated with the same panels but does not drive refinement.
pub fn integrate_with_side<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(IntegralResult, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if a == b {
        return Ok((IntegralResult { value: 0.0, error_estimate: 0.0, evaluations: 0, converged: true }, 0.0));
    }
    let (value, error, side) = rule(&mut f, a, b)?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error, side, seq: 0 });
    let mut seq = 1;
    let mut total = value;
    let mut total_err = error;
    let mut stalled = false;

    while total_err > spec.target(total) && heap.len() < spec.max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            heap.push(worst);
            stalled = true;
            break;
        }
        let (v1, e1, s1) = rule(&mut f, worst.a, mid)?;
        let (v2, e2, s2) = rule(&mut f, mid, worst.b)?;
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, side: s1, seq });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, side: s2, seq: seq + 1 });
        seq += 2;
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error_estimate: f64 = panels.iter().map(|p| p.error).sum();
    let side: f64 = panels.iter().map(|p| p.side).sum();
    let converged = !stalled && error_estimate <= spec.target(value);
    Ok((IntegralResult { value, error_estimate, evaluations, converged }, side))
}
