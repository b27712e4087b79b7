//! 21-point Gauss–Kronrod panel with the embedded 10-point Gauss rule.

use super::QuadValue;

/// Kronrod abscissae on [0, 1], descending; odd indices are the Gauss nodes.
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

/// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct PanelEstimate<T> {
    pub kronrod: T,
    pub gauss: T,
    pub err: f64,
}

/// Integrates `f` over `[a, b]`. Non-finite samples make the error infinite
/// so the caller keeps refining or reports failure.
pub fn gk21_panel<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> PanelEstimate<T> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut fv = [T::default(); 21];
    fv[10] = fc;
    for j in 0..10 {
        let dx = h * XGK[j];
        fv[j] = f(c - dx);
        fv[20 - j] = f(c + dx);
    }
    let mut kron = fc * WGK[10];
    let mut gauss = T::default();
    for j in 0..10 {
        let pair = fv[j] + fv[20 - j];
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut resasc = 0.0;
    let mut resabs = 0.0;
    for (j, v) in fv.iter().enumerate() {
        let w = WGK[if j <= 10 { j } else { 20 - j }];
        resasc += w * (*v - mean).norm();
        resabs += w * v.norm();
    }
    let scale = h.abs();
    let kron = kron * h;
    let gauss = gauss * h;
    let resasc = resasc * scale;
    let resabs = resabs * scale;
    let diff = (kron - gauss).norm();
    let mut err = diff;
    if resasc > 0.0 && diff > 0.0 {
        err = resasc * (200.0 * diff / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    if !fv.iter().all(|v| v.is_finite()) {
        err = f64::INFINITY;
    }
    PanelEstimate {
        kronrod: kron,
        gauss,
        err,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre(n: usize, x: f64) -> (f64, f64) {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    }

    #[test]
    fn gauss_nodes_are_legendre_roots() {
        for j in 0..5 {
            let x = XGK[2 * j + 1];
            let (p, dp) = legendre(10, x);
            assert!(p.abs() < 1e-14, "node {x}");
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            assert!((w - WG[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_for_polynomials() {
        for deg in 0..=31u32 {
            let est = gk21_panel(&|x: f64| x.powi(deg as i32), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((est.kronrod - exact).abs() < 2e-15, "kronrod degree {deg}");
            if deg <= 19 {
                assert!((est.gauss - exact).abs() < 2e-15, "gauss degree {deg}");
            }
        }
    }
}
