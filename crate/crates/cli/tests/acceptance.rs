//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! (run with `--nocapture` for the per-check breakdown on stderr).

use mdcnet_cli::acceptance;

fn criterion(id: u8) {
    let rep = acceptance::run(id).expect("known criterion");
    println!("{}", rep.line());
    eprint!("{rep}");
    assert!(rep.pass(), "{}", rep.line());
}

#[test]
fn criterion_01_contact_statistics() {
    criterion(1);
}

#[test]
fn criterion_02_mean_chord_fit() {
    criterion(2);
}

#[test]
fn criterion_03_mdc_coverage_flatness() {
    criterion(3);
}

#[test]
fn criterion_04_ap_coverage_vs_threshold() {
    criterion(4);
}

#[test]
fn criterion_05_vacation_queue_oracle() {
    criterion(5);
}

#[test]
fn criterion_06_stability_dichotomy() {
    criterion(6);
}

#[test]
fn criterion_07_delay_shapes() {
    criterion(7);
}

#[test]
fn criterion_08_mdc_delay_variants() {
    criterion(8);
}

#[test]
fn criterion_09_energy_trends() {
    criterion(9);
}

#[test]
fn criterion_10_numerical_hygiene() {
    criterion(10);
}
