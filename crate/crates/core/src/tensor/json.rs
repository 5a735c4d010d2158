//! JSON state files and the fixed-precision number format shared with reports.
//!
//! A state file is an object
//!
//! ```json
//! {"kind":"state","dims":[2,2],"party":["A","B"],"labels":["A","B"],
//!  "data":[[7.0710678118654757e-1,0.0000000000000000e0], ...]}
//! ```
//!
//! `data` holds `N` amplitudes for `kind = "state"` and `N²` row-major
//! entries for `kind = "density"`. Every real is written with 17 significant
//! digits so a write/read cycle reproduces the bits exactly.

use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::tensor::layout::{Party, Subsystem, SubsystemLayout};
use crate::tensor::matrix::Matrix;
use crate::tensor::state::{Composite, DensityMatrix, StateVector};

/// Wraps a serde_json formatter, printing every float as `{:.16e}`.
pub struct SigDigits<F>(pub F);

impl<F: Formatter> Formatter for SigDigits<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn serialize_with<T: Serialize, F: Formatter>(value: &T, formatter: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits(formatter));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Single-line JSON with 17-significant-digit reals.
pub fn to_compact_json<T: Serialize>(value: &T) -> Result<String> {
    serialize_with(value, CompactFormatter)
}

/// Indented JSON with 17-significant-digit reals.
pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    serialize_with(value, PrettyFormatter::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    State,
    Density,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub kind: StateKind,
    pub dims: Vec<usize>,
    pub party: Vec<Party>,
    pub labels: Vec<String>,
    pub data: Vec<[f64; 2]>,
}

/// Content of a state file after validation.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedState {
    State(StateVector),
    Density(DensityMatrix),
}

impl LoadedState {
    pub fn into_state(self) -> Result<StateVector> {
        match self {
            LoadedState::State(s) => Ok(s),
            LoadedState::Density(_) => Err(Error::Format("expected kind \"state\", found \"density\"".into())),
        }
    }
}

fn file_header(layout: &SubsystemLayout) -> (Vec<usize>, Vec<Party>, Vec<String>) {
    (layout.dims(), layout.parties(), layout.labels().into_iter().map(String::from).collect())
}

fn pairs(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

impl From<&StateVector> for StateFile {
    fn from(s: &StateVector) -> Self {
        let (dims, party, labels) = file_header(s.layout());
        StateFile { kind: StateKind::State, dims, party, labels, data: pairs(s.amplitudes()) }
    }
}

impl From<&DensityMatrix> for StateFile {
    fn from(rho: &DensityMatrix) -> Self {
        let (dims, party, labels) = file_header(rho.layout());
        StateFile { kind: StateKind::Density, dims, party, labels, data: pairs(rho.matrix().as_slice()) }
    }
}

impl StateFile {
    pub fn into_loaded(self) -> Result<LoadedState> {
        let n = self.dims.len();
        if self.party.len() != n || self.labels.len() != n {
            return Err(Error::Format(format!(
                "dims, party and labels must have equal length ({}, {}, {})",
                n,
                self.party.len(),
                self.labels.len()
            )));
        }
        let layout = SubsystemLayout::new(
            self.labels.into_iter().zip(self.dims).zip(self.party).map(|((l, d), p)| Subsystem::new(l, d, p)).collect(),
        )
        .map_err(|e| Error::Format(e.to_string()))?;
        let values: Vec<C64> = self.data.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let total = layout.total_dim();
        let loaded = match self.kind {
            StateKind::State => {
                if values.len() != total {
                    return Err(Error::Format(format!("expected {total} amplitudes, found {}", values.len())));
                }
                LoadedState::State(StateVector::new(layout, values).map_err(|e| Error::Format(e.to_string()))?)
            }
            StateKind::Density => {
                if values.len() != total * total {
                    return Err(Error::Format(format!("expected {} entries, found {}", total * total, values.len())));
                }
                let matrix = Matrix::from_row_major(total, values).map_err(|e| Error::Format(e.to_string()))?;
                let rho = DensityMatrix::new(layout, matrix).map_err(|e| Error::Format(e.to_string()))?;
                rho.validate().map_err(|e| Error::Format(e.to_string()))?;
                LoadedState::Density(rho)
            }
        };
        Ok(loaded)
    }
}

pub fn state_to_json(s: &StateVector) -> Result<String> {
    to_compact_json(&StateFile::from(s))
}

pub fn density_to_json(rho: &DensityMatrix) -> Result<String> {
    to_compact_json(&StateFile::from(rho))
}

pub fn from_json(text: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.into_loaded()
}

pub fn read_state_file(path: &Path) -> Result<LoadedState> {
    from_json(&fs::read_to_string(path)?)
}

pub fn write_state_file(path: &Path, s: &StateVector) -> Result<()> {
    let mut text = state_to_json(s)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_density_file(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let mut text = density_to_json(rho)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
