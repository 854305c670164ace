//! CSV readers and writers with fixed headers and 17-significant-digit floats.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{ModePair, Spectrum, ZeroSet};
use crate::transferfn::{Channel, FrequencyResponse, PhaseMode};

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Raw flow samples read from a `t,q1,q2` file; spacing may be irregular.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSamples {
    pub t: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
}

pub fn read_flow_csv(reader: impl Read) -> Result<FlowSamples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers != ["t", "q1", "q2"] {
        return Err(Error::InvalidSeries(format!(
            "expected header `t,q1,q2`, found `{}`",
            headers.join(",")
        )));
    }
    let mut out = FlowSamples {
        t: Vec::new(),
        q1: Vec::new(),
        q2: Vec::new(),
    };
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("");
            field.parse::<f64>().map_err(|_| {
                Error::InvalidSeries(format!("row {}: cannot parse `{field}` as a number", line + 2))
            })
        };
        out.t.push(parse(0)?);
        out.q1.push(parse(1)?);
        out.q2.push(parse(2)?);
    }
    if out.t.is_empty() {
        return Err(Error::InvalidSeries("input has no data rows".into()));
    }
    Ok(out)
}

/// Writes `t,p1,p2`, with `p1_ss,p2_ss` appended when a state-space run is given.
pub fn write_pressure_csv(
    writer: impl Write,
    time: &[f64],
    p1: &[f64],
    p2: &[f64],
    state_space: Option<(&[f64], &[f64])>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if state_space.is_some() {
        w.write_record(["t", "p1", "p2", "p1_ss", "p2_ss"])?;
    } else {
        w.write_record(["t", "p1", "p2"])?;
    }
    for i in 0..time.len() {
        let mut row = vec![fmt_float(time[i]), fmt_float(p1[i]), fmt_float(p2[i])];
        if let Some((a, b)) = state_space {
            row.push(fmt_float(a[i]));
            row.push(fmt_float(b[i]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const BODE_HEADER: [&str; 6] = [
    "omega_rad_s",
    "mag_db_g11",
    "phase_deg_g11",
    "mag_db_g21",
    "phase_deg_g21",
    "flags",
];

pub fn write_bode_csv(writer: impl Write, fr: &FrequencyResponse, phase: PhaseMode) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BODE_HEADER)?;
    let m11 = fr.magnitude_db(Channel::G11);
    let p11 = fr.phase_deg(Channel::G11, phase);
    let m21 = fr.magnitude_db(Channel::G21);
    let p21 = fr.phase_deg(Channel::G21, phase);
    for (i, r) in fr.values.iter().enumerate() {
        w.write_record([
            fmt_float(fr.omega[i]),
            fmt_float(m11[i]),
            fmt_float(p11[i]),
            fmt_float(m21[i]),
            fmt_float(p21[i]),
            if r.near_pole { "near_pole".into() } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn pair_rows(pairs: &[ModePair]) -> impl Iterator<Item = (i64, Complex64)> + '_ {
    pairs.iter().enumerate().flat_map(|(i, p)| {
        let k = i as i64 + 1;
        [(k, p.upper()), (-k, p.lower())]
    })
}

fn write_rows(writer: impl Write, rows: impl Iterator<Item = (i64, Complex64)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["k", "re", "im"])?;
    for (k, z) in rows {
        w.write_record([k.to_string(), fmt_float(z.re), fmt_float(z.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// `k,re,im` with `k = 0` for the zero eigenvalue, then `k, -k` per pair.
pub fn write_spectrum_csv(writer: impl Write, spectrum: &Spectrum) -> Result<()> {
    let zero = std::iter::once((0, Complex64::new(spectrum.lambda0, 0.0)));
    write_rows(writer, zero.chain(pair_rows(&spectrum.pairs)))
}

pub fn write_zeros_csv(writer: impl Write, zeros: &ZeroSet) -> Result<()> {
    write_rows(writer, pair_rows(&zeros.pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_constants, PipeParameters};
    use crate::spectral::eigenvalues_closed_form;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 5.206_408_125_964_586, 1e-300, 0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn flow_csv() {
        let text = "t, q1, q2\n0, 1, 2\n0.5, 1.5, 2.5\n";
        let f = read_flow_csv(text.as_bytes()).unwrap();
        assert_eq!(f.t, vec![0.0, 0.5]);
        assert_eq!(f.q2, vec![2.0, 2.5]);
        assert!(read_flow_csv("time,a,b\n0,1,2\n".as_bytes()).is_err());
        assert!(read_flow_csv("t,q1,q2\n0,x,2\n".as_bytes()).is_err());
        assert!(read_flow_csv("t,q1,q2\n".as_bytes()).is_err());
    }

    #[test]
    fn pressure_csv_layout() {
        let mut buf = Vec::new();
        write_pressure_csv(&mut buf, &[0.0], &[1.0], &[2.0], Some((&[3.0], &[4.0]))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,p1,p2,p1_ss,p2_ss");
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
    }

    #[test]
    fn spectrum_csv_rows() {
        let k = derive_constants(&PipeParameters::case_study()).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &eigenvalues_closed_form(&k, 2).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let ks: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(ks, ["0", "1", "-1", "2", "-2"]);
    }
}
