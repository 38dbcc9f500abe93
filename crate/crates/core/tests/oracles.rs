//! Frozen reference values, computed independently of this crate by direct
//! product expansion and by hand enumeration.

use overbressoud::bijections::{card, CellKind, CellSpec};
use overbressoud::enumerate::{
    count_condition_side, count_residue_side, count_table, overpartitions_of, partitions_of, ConditionFamily as CF,
    ResidueFamily as RF,
};
use overbressoud::qexpr::eval_str;
use overbressoud::series::{gen_d, series_w};
use overbressoud::verify::{run, Campaign, Config};

const OVERPARTITIONS: [u64; 21] =
    [1, 2, 4, 8, 14, 24, 40, 64, 100, 154, 232, 344, 504, 728, 1040, 1472, 2062, 2864, 3948, 5400, 7336];
const PARTITIONS: [u64; 21] = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135, 176, 231, 297, 385, 490, 627];
const ROGERS_RAMANUJAN_G: [u64; 21] = [1, 1, 1, 1, 2, 2, 3, 3, 4, 5, 6, 7, 9, 10, 12, 14, 17, 19, 23, 26, 31];
const ROGERS_RAMANUJAN_H: [u64; 21] = [1, 0, 1, 1, 1, 1, 2, 2, 3, 3, 4, 4, 6, 6, 8, 9, 11, 12, 15, 16, 20];
const ODD_OVERPARTITIONS: [u64; 16] = [1, 2, 2, 4, 6, 8, 12, 16, 22, 30, 40, 52, 68, 88, 112, 144];
const C_3_1: [u64; 16] = [1, 1, 2, 4, 5, 8, 12, 17, 24, 34, 46, 62, 84, 111, 146, 192];
const C_3_2: [u64; 16] = [1, 2, 3, 5, 8, 12, 18, 26, 36, 51, 70, 95, 128, 170, 224, 294];
const C_4_2: [u64; 16] = [1, 2, 3, 6, 10, 15, 24, 36, 52, 76, 108, 151, 210, 288, 390, 526];
const DISTINCT_PARTS: [u64; 16] = [1, 1, 1, 2, 2, 3, 4, 5, 6, 8, 10, 12, 15, 18, 22, 27];

fn ints(coeffs: &[num_bigint::BigInt]) -> Vec<u64> {
    coeffs.iter().map(|c| u64::try_from(c).unwrap()).collect()
}

#[test]
fn stream_sizes() {
    for n in 0..=20u32 {
        assert_eq!(overpartitions_of(n, None).count() as u64, OVERPARTITIONS[n as usize], "n={n}");
        assert_eq!(partitions_of(n, None).count() as u64, PARTITIONS[n as usize], "n={n}");
    }
}

#[test]
fn rogers_ramanujan_through_gordon() {
    for n in 0..=20u32 {
        let g = ROGERS_RAMANUJAN_G[n as usize];
        let h = ROGERS_RAMANUJAN_H[n as usize];
        assert_eq!(count_residue_side(RF::EGordon, 2, 2, n).unwrap(), g);
        assert_eq!(count_condition_side(CF::FGordon, 2, 2, n, None).unwrap(), g);
        assert_eq!(count_residue_side(RF::EGordon, 2, 1, n).unwrap(), h);
        assert_eq!(count_condition_side(CF::FGordon, 2, 1, n, None).unwrap(), h);
    }
}

#[test]
fn lovejoy_at_k2_counts_odd_overpartitions() {
    for n in 0..16u32 {
        assert_eq!(count_residue_side(RF::AbarLovejoy, 2, 1, n).unwrap(), ODD_OVERPARTITIONS[n as usize]);
        assert_eq!(count_condition_side(CF::BbarLovejoy, 2, 1, n, None).unwrap(), ODD_OVERPARTITIONS[n as usize]);
    }
}

#[test]
fn main_identity_sequences() {
    for (k, i, seq) in [(3, 1, C_3_1), (3, 2, C_3_2), (4, 2, C_4_2), (2, 1, DISTINCT_PARTS), (2, 2, DISTINCT_PARTS)] {
        for n in 0..16u32 {
            let want = seq[n as usize];
            assert_eq!(count_residue_side(RF::CMain, k, i, n).unwrap(), want, "C_{k},{i}({n})");
            assert_eq!(count_condition_side(CF::DMain, k, i, n, None).unwrap(), want, "D_{k},{i}({n})");
        }
        assert_eq!(ints(gen_d(k, i, 15).unwrap().coeffs()), seq.to_vec(), "W_{k},{i}(1)");
    }
}

#[test]
fn hand_checked_cells() {
    assert_eq!(count_condition_side(CF::DMain, 3, 2, 2, None).unwrap(), 3);
    assert_eq!(count_condition_side(CF::DMain, 3, 1, 2, None).unwrap(), 2);
    assert!(count_condition_side(CF::BBressoud, 2, 2, 2, None).is_err());
    let mut edge = Config::new(2, 2);
    edge.include_i_equals_k = true;
    let report = run(Campaign::Bressoud, &edge).unwrap();
    let last = report.records.last().unwrap();
    assert_eq!((last.expected.as_str(), last.actual.as_str()), ("1", "0"));
    assert_eq!(count_residue_side(RF::CMain, 3, 2, 2).unwrap(), 3);
    assert_eq!(count_residue_side(RF::EGordon, 2, 2, 4).unwrap(), 2);
    assert_eq!(count_residue_side(RF::AbarLovejoy, 2, 1, 4).unwrap(), 6);

    let t = count_table(CF::DMain, 3, 2, 2, 3).unwrap();
    assert_eq!((t.at(2, 3), t.at(1, 1), t.at(0, 0)), (3, 2, 1));

    assert_eq!(card(&CellSpec::new(CellKind::S, 3, 2, 2, 2)), 1);
    assert_eq!(card(&CellSpec::new(CellKind::T, 3, 1, 2, 5)), 3);
    assert_eq!(card(&CellSpec::new(CellKind::S, 4, 3, 0, 0)), 0);

    let w = series_w(3, 2, 6).unwrap();
    assert_eq!(w.coeff(2, 3), 3.into());
}

#[test]
fn qexpr_matches_enumeration() {
    let s = eval_str("(-q;q)_inf/(q;q)_inf", 4).unwrap();
    assert_eq!(ints(s.coeffs()), OVERPARTITIONS[..5].to_vec());
    let s = eval_str("(q;q)_inf^-1", 20).unwrap();
    assert_eq!(ints(s.coeffs()), PARTITIONS.to_vec());
}
