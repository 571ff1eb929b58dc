//! Category tables at the reference spectrum predict the GN totals of
//! perturbed spectra through the delta matrices.

use fwnl_core::categories::{category_apsds, inner_region, CategoryKey, DEFAULT_INNER_FRACTION};
use fwnl_core::estimator::{db_steps, delta_matrix_apsd, delta_matrix_nsr, perturbation_grid, WDM_APSD};
use fwnl_core::gn_model::{nln_psd, FwmKernelSpec, LinkParameters};
use fwnl_core::spectra::{apply_perturbation, apsd, build_reference_spectrum, FrequencyGrid, ShapeSpec, SpectralLayout};
use fwnl_core::units::{dbm_to_watt, GHZ, MHZ};
use fwnl_core::{NoiseDecomposition, Quantity};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn notch_total(tx: &fwnl_core::Psd, link: &LinkParameters, region: fwnl_core::Interval) -> f64 {
    let g = tx.grid();
    let lo = g.bin_of(region.lo).unwrap();
    let hi = g.bin_of(region.hi).unwrap();
    let out = FrequencyGrid::new(g.freq(lo as usize), g.df(), (hi - lo) as usize).unwrap();
    apsd(&nln_psd(tx, link, &FwmKernelSpec::default(), &out).unwrap(), region).unwrap()
}

#[test]
fn single_channel_apsd_predictions() {
    let layout = SpectralLayout::symmetric(20.0 * GHZ, 10.0 * GHZ, 20.0 * GHZ).unwrap();
    let grid = FrequencyGrid::centered(100.0 * GHZ, 250.0 * MHZ).unwrap();
    let tx = build_reference_spectrum(&layout, &ShapeSpec::boi_channel(&layout, dbm_to_watt(2.0)), &grid).unwrap();
    let link = LinkParameters::ndsf(4).unwrap();
    let kernel = FwmKernelSpec::default();
    let inner = inner_region(&grid, layout.n(), DEFAULT_INNER_FRACTION).unwrap();

    let keys = CategoryKey::intra();
    let mut dec = category_apsds(&tx, &layout, &link, &kernel, &keys, layout.n(), DEFAULT_INNER_FRACTION).unwrap();
    dec.insert(CategoryKey::Ase, 0.0);
    let mut basis = keys.to_vec();
    basis.push(CategoryKey::Ase);

    let db = db_steps(-2.0, 2.0, 2.0).unwrap();
    let pairs = perturbation_grid(&db, &db).unwrap();
    let predicted = delta_matrix_apsd(&pairs, &basis).unwrap().predict(&dec).unwrap();
    for (p, want) in pairs.iter().zip(predicted) {
        let perturbed = apply_perturbation(&tx, &layout, p).unwrap();
        let got = notch_total(&perturbed, &link, inner);
        assert!(close(got, want, 1e-10), "{p:?}: {got} vs {want}");
    }
}

#[test]
fn wdm_apsd_predictions() {
    let layout = SpectralLayout::symmetric(20.0 * GHZ, 10.0 * GHZ, 20.0 * GHZ).unwrap();
    let grid = FrequencyGrid::centered(250.0 * GHZ, 500.0 * MHZ).unwrap();
    let p = dbm_to_watt(2.0);
    let shape = ShapeSpec::boi_channel(&layout, p).with_neighbors(&layout, 1, 75.0 * GHZ, 50.0 * GHZ, p);
    let tx = build_reference_spectrum(&layout, &shape, &grid).unwrap();
    let link = LinkParameters::ndsf(2).unwrap();
    let kernel = FwmKernelSpec::default();
    let inner = inner_region(&grid, layout.n(), DEFAULT_INNER_FRACTION).unwrap();

    let nln: Vec<CategoryKey> = WDM_APSD.iter().copied().filter(|k| k.is_nln()).collect();
    let mut dec = category_apsds(&tx, &layout, &link, &kernel, &nln, layout.n(), DEFAULT_INNER_FRACTION).unwrap();
    // The all-neighbour category does not respond to the perturbation.
    let ob3 = category_apsds(&tx, &layout, &link, &kernel, &[CategoryKey::OB_OB_OB], layout.n(), DEFAULT_INNER_FRACTION)
        .unwrap()
        .require(CategoryKey::OB_OB_OB)
        .unwrap();
    dec.insert(CategoryKey::Ase, ob3);

    let pairs = perturbation_grid(&[-2.0, 1.0], &[-1.0, 2.0]).unwrap();
    let predicted = delta_matrix_apsd(&pairs, &WDM_APSD).unwrap().predict(&dec).unwrap();
    for (p, want) in pairs.iter().zip(predicted) {
        let perturbed = apply_perturbation(&tx, &layout, p).unwrap();
        let got = notch_total(&perturbed, &link, inner);
        assert!(close(got, want, 1e-10), "{p:?}: {got} vs {want}");
    }
}

#[test]
fn nsr_predictions_in_lower_subcarrier() {
    let layout = SpectralLayout::symmetric(20.0 * GHZ, 10.0 * GHZ, 20.0 * GHZ).unwrap();
    let grid = FrequencyGrid::centered(100.0 * GHZ, 250.0 * MHZ).unwrap();
    let tx = build_reference_spectrum(&layout, &ShapeSpec::boi_channel(&layout, dbm_to_watt(2.0)), &grid).unwrap();
    let link = LinkParameters::ndsf(3).unwrap();
    let kernel = FwmKernelSpec::default();
    let signal = apsd(&tx, layout.a()).unwrap();
    let (trx, ase) = (1e-3, 2e-3);

    let keys = CategoryKey::intra();
    let apsds = category_apsds(&tx, &layout, &link, &kernel, &keys, layout.a(), 1.0).unwrap();
    let mut dec = NoiseDecomposition::new(Quantity::Nsr);
    for (k, v) in apsds.iter() {
        dec.insert(k, v / signal);
    }
    dec.insert(CategoryKey::Trx, trx);
    dec.insert(CategoryKey::Ase, ase);

    let basis = [keys[0], keys[1], keys[2], keys[3], CategoryKey::Trx, CategoryKey::Ase];
    let pairs = perturbation_grid(&[-2.0, 0.0, 1.5], &[-1.0, 2.0]).unwrap();
    let predicted = delta_matrix_nsr(&pairs, &basis).unwrap().predict(&dec).unwrap();
    for (p, want) in pairs.iter().zip(predicted) {
        let perturbed = apply_perturbation(&tx, &layout, p).unwrap();
        let s = apsd(&perturbed, layout.a()).unwrap();
        let got = notch_total(&perturbed, &link, layout.a()) / s + trx + ase * signal / s;
        assert!(close(got, want, 1e-10), "{p:?}: {got} vs {want}");
    }
}

#[test]
fn rescaled_table_matches_recomputed_spectrum() {
    use fwnl_core::categories::CategoryTable;
    use fwnl_core::PerturbationPair;

    let layout = SpectralLayout::symmetric(20.0 * GHZ, 10.0 * GHZ, 20.0 * GHZ).unwrap();
    let grid = FrequencyGrid::centered(250.0 * GHZ, 500.0 * MHZ).unwrap();
    let p = dbm_to_watt(1.0);
    let shape = ShapeSpec::boi_channel(&layout, p).with_neighbors(&layout, 1, 75.0 * GHZ, 50.0 * GHZ, p);
    let tx = build_reference_spectrum(&layout, &shape, &grid).unwrap();
    let link = LinkParameters::ndsf(3).unwrap();
    let kernel = FwmKernelSpec::default();
    let table = CategoryTable::for_region(&tx, &layout, &link, &kernel, layout.boi()).unwrap();
    let pair = PerturbationPair::from_db(1.5, -0.5).unwrap();
    let perturbed = apply_perturbation(&tx, &layout, &pair).unwrap();
    let direct = nln_psd(&perturbed, &link, &kernel, table.grid()).unwrap();
    for (a, b) in table.perturbed_total(&pair).values().iter().zip(direct.values()) {
        assert!(close(*a, *b, 1e-10));
    }
}
