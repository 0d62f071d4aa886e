use wronskian_lab::fusion::LimitMethod;
use wronskian_lab::tables::{self, Table2Options};
use wronskian_lab::wronskian::PSOptions;

#[test]
fn table1_and_table4_regenerate() {
    let t1 = tables::table1(LimitMethod::default()).unwrap();
    assert!(t1.pass(), "{t1}");
    let t4 = tables::table4(&PSOptions::default()).unwrap();
    assert!(t4.pass(), "{t4}");
    assert!(format!("{t4}").ends_with("PASS"));
}

#[test]
fn table3_small_chains() {
    let t3 = tables::table3(&PSOptions::default(), 7).unwrap();
    assert!(t3.pass(), "{t3}");
    assert_eq!(t3.entries.len(), 10);
}

#[test]
fn table2_printed_digits() {
    let res = tables::table2(&Table2Options::default()).unwrap();
    assert!(res.report.pass(), "{}", res.report);
    for p in &res.printed {
        assert_eq!(p.agrees(), !p.misprint, "{} printed {} computed {}", p.label, p.printed, p.computed);
    }
}

/// Every printed Table 2 number, misprints included, against the computed
/// groundstate at 1e-5 absolute. Fails: several entries are printed with
/// four decimals and five are misprinted.
#[test]
#[ignore]
fn table2_strict_against_printed() {
    let res = tables::table2(&Table2Options::default()).unwrap();
    let bad: Vec<String> = res
        .printed
        .iter()
        .filter(|p| (p.printed - p.computed).abs() > 1e-5)
        .map(|p| format!("{}: printed {} computed {:.8}", p.label, p.printed, p.computed))
        .collect();
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
