//! Bode-type log-sensitivity integrals for LTI filtering systems.
//!
//! A system is three transfer functions in zero-pole-gain form: the signal model
//! `G_x`, the measurement model `G_y` and the filter `F`. After [`sysmodel::validate`]
//! the integrals of `ln|P|` and `ln|M|` come out of [`closedform`] as exact sums over
//! roots, and [`quad`] recomputes them numerically.
//!
//! ```
//! use filtsens::closedform::{ct_p_integral, CaseTag};
//! use filtsens::rational::{RationalTF, TimeDomain};
//! use filtsens::sysmodel::{validate, Tolerances};
//!
//! let ct = TimeDomain::Continuous;
//! let gx = RationalTF::from_real(1.0, &[], &[-1.0], ct)?;
//! let gy = RationalTF::from_real(1.0, &[], &[-2.0], ct)?;
//! let f = RationalTF::from_real(1.0, &[], &[-3.0, -4.0], ct)?;
//! let (sys, report) = validate(gx, gy, f, Tolerances::default())?;
//! assert!(report.all_ok());
//!
//! let p = ct_p_integral(&sys)?;
//! assert_eq!(p.case, CaseTag::CtPCase1);
//! println!("{p}");
//! # Ok::<(), filtsens::error::Error>(())
//! ```

// tolerance checks are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closedform;
pub mod error;
pub mod poly;
pub mod quad;
pub mod rational;
pub mod sysmodel;
