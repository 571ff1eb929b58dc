use fwnl_core::categories::{category_apsds, CategoryKey, DEFAULT_INNER_FRACTION};
use fwnl_core::gn_model::{FwmKernelSpec, LinkParameters};
use fwnl_core::spectra::{build_reference_spectrum, FrequencyGrid, ShapeSpec, SpectralLayout};
use fwnl_core::units::{dbm_to_watt, GHZ, MHZ};

fn notch_total(df: f64) -> f64 {
    let layout = SpectralLayout::symmetric(20.0 * GHZ, 10.0 * GHZ, 20.0 * GHZ).unwrap();
    let grid = FrequencyGrid::centered(160.0 * GHZ, df).unwrap();
    let tx = build_reference_spectrum(&layout, &ShapeSpec::boi_channel(&layout, dbm_to_watt(2.0)), &grid).unwrap();
    let link = LinkParameters::ndsf(10).unwrap();
    category_apsds(&tx, &layout, &link, &FwmKernelSpec::default(), &CategoryKey::intra(), layout.n(), DEFAULT_INNER_FRACTION)
        .unwrap()
        .iter()
        .map(|(_, v)| v)
        .sum()
}

#[test]
fn four_times_finer_grid_changes_notch_by_under_one_percent() {
    let coarse = notch_total(200.0 * MHZ);
    let fine = notch_total(50.0 * MHZ);
    let rel = (coarse - fine).abs() / fine;
    assert!(rel < 0.01, "relative change {rel}");
}
