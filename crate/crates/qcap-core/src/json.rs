//! Wire format for channels and superoperators.
//!
//! Channels serialize as
//! `{"dim_in": n, "dim_out": m, "kraus": [ [ [ [re, im], ... ] per row ] per operator ]}`
//! and superoperators identically with a `"choi"` matrix instead of the
//! Kraus list. Parsing rejects trace-preservation violations beyond 1e-6
//! with a diagnostic naming the residual norm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, Superoperator};
use crate::error::{Error, Result};
use crate::operators::CMat;

/// Trace-preservation tolerance at the parsing boundary.
pub const PARSE_TP_TOL: f64 = 1e-6;

#[derive(Serialize, Deserialize)]
struct ChannelDto {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize)]
struct SuperoperatorDto {
    dim_in: usize,
    dim_out: usize,
    choi: Vec<Vec<[f64; 2]>>,
}

fn matrix_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>], nrows: usize, ncols: usize, what: &str) -> Result<CMat> {
    if rows.len() != nrows {
        return Err(Error::Parse(format!(
            "{what}: expected {nrows} rows, found {}",
            rows.len()
        )));
    }
    let mut m = CMat::zeros(nrows, ncols);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Parse(format!(
                "{what}: row {r} has {} entries, expected {ncols}",
                row.len()
            )));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!(
                    "{what}: non-finite entry at ({r},{c})"
                )));
            }
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

pub fn channel_to_json(t: &Channel) -> String {
    let dto = ChannelDto {
        dim_in: t.dim_in(),
        dim_out: t.dim_out(),
        kraus: t.kraus().iter().map(matrix_to_rows).collect(),
    };
    serde_json::to_string_pretty(&dto).expect("channel serialization cannot fail")
}

pub fn channel_from_json(text: &str) -> Result<Channel> {
    let dto: ChannelDto =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel JSON: {e}")))?;
    if dto.dim_in == 0 || dto.dim_out == 0 {
        return Err(Error::Parse("channel dimensions must be positive".into()));
    }
    if dto.kraus.is_empty() {
        return Err(Error::Parse("channel needs at least one Kraus operator".into()));
    }
    let kraus: Vec<CMat> = dto
        .kraus
        .iter()
        .enumerate()
        .map(|(i, op)| rows_to_matrix(op, dto.dim_out, dto.dim_in, &format!("Kraus operator {i}")))
        .collect::<Result<_>>()?;
    Channel::with_tolerance(kraus, PARSE_TP_TOL)
}

pub fn superoperator_to_json(l: &Superoperator) -> String {
    let dto = SuperoperatorDto {
        dim_in: l.dim_in(),
        dim_out: l.dim_out(),
        choi: matrix_to_rows(l.choi()),
    };
    serde_json::to_string_pretty(&dto).expect("superoperator serialization cannot fail")
}

pub fn superoperator_from_json(text: &str) -> Result<Superoperator> {
    let dto: SuperoperatorDto =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("superoperator JSON: {e}")))?;
    let side = dto.dim_in * dto.dim_out;
    let choi = rows_to_matrix(&dto.choi, side, side, "Choi matrix")?;
    Superoperator::new(dto.dim_in, dto.dim_out, choi)
}
