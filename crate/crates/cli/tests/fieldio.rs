use std::f64::consts::PI;
use std::path::Path;

use fracwave::spectral::{DomainSpec, GridSeries, TimeGrid};
use fracwave_cli::fieldio::{format_field, parse_field};
use ndarray::Array2;
use proptest::prelude::*;

fn bits(g: &GridSeries<f64>) -> Vec<u64> {
    g.values.iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #[test]
    fn field_reload_is_bit_identical(
        values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 6 * 4),
        length in 0.1f64..10.0,
        t_final in 0.1f64..10.0,
    ) {
        let g = GridSeries::new(
            DomainSpec::interval(length, 4).unwrap(),
            TimeGrid::new(t_final, 5).unwrap(),
            Array2::from_shape_vec((6, 4), values).unwrap(),
        )
        .unwrap();
        let text = format_field(&g);
        let back = parse_field(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(bits(&g), bits(&back));
        prop_assert_eq!(&g.domain, &back.domain);
        prop_assert_eq!(g.time, back.time);
        prop_assert_eq!(format_field(&back), text);
    }
}

#[test]
fn special_values_survive() {
    let vals = [
        0.0,
        -0.0,
        f64::MIN_POSITIVE,
        5e-324,
        f64::MAX,
        -1.0 / 3.0,
        PI,
        1e-300,
    ];
    let g = GridSeries::new(
        DomainSpec::rectangle([PI, 2.0], [2, 2]).unwrap(),
        TimeGrid::new(1.0, 1).unwrap(),
        Array2::from_shape_vec((2, 4), vals.to_vec()).unwrap(),
    )
    .unwrap();
    let back = parse_field(&format_field(&g), Path::new("mem")).unwrap();
    assert_eq!(bits(&g), bits(&back));
    assert_eq!(back.domain.dim(), 2);
}

#[test]
fn truncated_file_is_rejected() {
    let g = GridSeries::new(
        DomainSpec::interval(1.0, 2).unwrap(),
        TimeGrid::new(1.0, 2).unwrap(),
        Array2::zeros((3, 2)),
    )
    .unwrap();
    let text = format_field(&g);
    let cut: String = text.lines().take(9).map(|l| format!("{l}\n")).collect();
    let err = parse_field(&cut, Path::new("f.field"))
        .unwrap_err()
        .to_string();
    assert!(err.contains("expected 3 rows"), "{err}");
}
