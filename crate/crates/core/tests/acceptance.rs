//! Acceptance criteria, one test each. Every test writes a single status
//! line to stderr (uncaptured) before asserting.

use std::io::Write;

use chafem::verify::{all_passed, criterion, summary_line};

fn check(n: u8) {
    let checks = criterion(n).unwrap_or_else(|e| panic!("criterion {n} errored: {e}"));
    let line = summary_line(n, &checks);
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(all_passed(&checks), "{line}");
}

#[test]
fn criterion_01_operator_oracles() {
    check(1);
}

#[test]
fn criterion_02_mass_conservation() {
    check(2);
}

#[test]
fn criterion_03_second_order_in_time() {
    check(3);
}

#[test]
fn criterion_04_gradient_superconvergence() {
    check(4);
}

#[test]
fn criterion_05_indicator_identities() {
    check(5);
}

#[test]
fn criterion_06_dominant_terms() {
    check(6);
}

#[test]
fn criterion_07_refinement_follows_interface() {
    check(7);
}

#[test]
fn criterion_08_energy_decay() {
    check(8);
}

#[test]
fn criterion_09_recovery_cheaper_than_residual() {
    check(9);
}

#[test]
fn criterion_10_mesh_refine_coarsen() {
    check(10);
}
