//! Minimal NIfTI-1 single-file I/O.
//!
//! Only the fields the pipeline needs are interpreted: dimensions, voxel
//! spacing, datatype, scale slope/intercept, and the qform/sform
//! orientation block (which is carried through untouched so masks stay
//! registered to their source volume). Both byte orders are accepted on
//! read — the 348 header-size field doubles as the endianness probe —
//! and files ending in `.gz` are (de)compressed transparently.
//!
//! Reads accept 3-D volumes (plus 4-D files whose fourth dimension is a
//! singleton) in the five datatypes below. Writes always produce
//! little-endian single-file images: `float64` for volumes, so that a
//! write/read cycle reproduces intensities bit-exactly, and `uint8` 0/1
//! for masks.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Orientation, Volume3D};

const HEADER_SIZE: usize = 348;
/// Data offset we write: header + 4-byte "no extensions" flag.
const WRITE_VOX_OFFSET: u64 = 352;
const MAGIC_SINGLE: &[u8; 4] = b"n+1\0";
const MAGIC_PAIR: &[u8; 4] = b"ni1\0";

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_INT32: i16 = 8;
const DT_FLOAT32: i16 = 16;
const DT_FLOAT64: i16 = 64;

fn datatype_name(code: i16) -> Option<&'static str> {
    match code {
        DT_UINT8 => Some("uint8"),
        DT_INT16 => Some("int16"),
        DT_INT32 => Some("int32"),
        DT_FLOAT32 => Some("float32"),
        DT_FLOAT64 => Some("float64"),
        _ => None,
    }
}

fn bytes_per_voxel(code: i16) -> usize {
    match code {
        DT_UINT8 => 1,
        DT_INT16 => 2,
        DT_INT32 => 4,
        DT_FLOAT32 => 4,
        DT_FLOAT64 => 8,
        _ => unreachable!("datatype validated before sizing"),
    }
}

/// Header fields interpreted by this reader.
#[derive(Clone, Debug)]
struct RawHeader {
    dim: [i16; 8],
    datatype: i16,
    pixdim: [f32; 8],
    vox_offset: f32,
    scl_slope: f32,
    scl_inter: f32,
    qform_code: i16,
    sform_code: i16,
    quatern: [f32; 3],
    qoffset: [f32; 3],
    srow: [[f32; 4]; 3],
    magic: [u8; 4],
}

fn parse_header<E: ByteOrder>(buf: &[u8]) -> RawHeader {
    let mut dim = [0i16; 8];
    E::read_i16_into(&buf[40..56], &mut dim);
    let mut pixdim = [0f32; 8];
    E::read_f32_into(&buf[76..108], &mut pixdim);
    let mut quatern = [0f32; 3];
    E::read_f32_into(&buf[256..268], &mut quatern);
    let mut qoffset = [0f32; 3];
    E::read_f32_into(&buf[268..280], &mut qoffset);
    let mut srow = [[0f32; 4]; 3];
    E::read_f32_into(&buf[280..296], &mut srow[0]);
    E::read_f32_into(&buf[296..312], &mut srow[1]);
    E::read_f32_into(&buf[312..328], &mut srow[2]);
    RawHeader {
        dim,
        datatype: E::read_i16(&buf[70..72]),
        pixdim,
        vox_offset: E::read_f32(&buf[108..112]),
        scl_slope: E::read_f32(&buf[112..116]),
        scl_inter: E::read_f32(&buf[116..120]),
        qform_code: E::read_i16(&buf[252..254]),
        sform_code: E::read_i16(&buf[254..256]),
        quatern,
        qoffset,
        srow,
        magic: [buf[344], buf[345], buf[346], buf[347]],
    }
}

fn open_reader(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path)?;
    let buffered = BufReader::new(file);
    if path
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.ends_with(".gz"))
    {
        Ok(Box::new(MultiGzDecoder::new(buffered)))
    } else {
        Ok(Box::new(buffered))
    }
}

enum Endian {
    Little,
    Big,
}

fn read_and_validate_header(reader: &mut dyn Read, path: &Path) -> Result<(RawHeader, Endian)> {
    let mut buf = [0u8; HEADER_SIZE];
    reader.read_exact(&mut buf).map_err(|e| {
        Error::Corrupt(format!("{}: header truncated ({e})", path.display()))
    })?;

    let endian = if LittleEndian::read_i32(&buf[0..4]) == HEADER_SIZE as i32 {
        Endian::Little
    } else if BigEndian::read_i32(&buf[0..4]) == HEADER_SIZE as i32 {
        Endian::Big
    } else {
        return Err(Error::Corrupt(format!(
            "{}: header size field is not 348 in either byte order",
            path.display()
        )));
    };

    let hdr = match endian {
        Endian::Little => parse_header::<LittleEndian>(&buf),
        Endian::Big => parse_header::<BigEndian>(&buf),
    };

    if &hdr.magic == MAGIC_PAIR {
        return Err(Error::Format(format!(
            "{}: two-file (.hdr/.img) NIfTI images are not supported",
            path.display()
        )));
    }
    if &hdr.magic != MAGIC_SINGLE {
        return Err(Error::Format(format!(
            "{}: bad magic bytes {:?} (expected \"n+1\")",
            path.display(),
            hdr.magic
        )));
    }
    Ok((hdr, endian))
}

fn header_geometry(hdr: &RawHeader, path: &Path) -> Result<([usize; 3], [f64; 3])> {
    let rank = hdr.dim[0];
    let ok_rank = rank == 3 || (rank == 4 && hdr.dim[4] == 1);
    if !ok_rank {
        return Err(Error::Format(format!(
            "{}: only 3-D images are supported (dim[0] = {rank}, dim[4] = {})",
            path.display(),
            hdr.dim[4]
        )));
    }
    let mut dims = [0usize; 3];
    for axis in 0..3 {
        let d = hdr.dim[axis + 1];
        if d < 1 {
            return Err(Error::InvalidGeometry(format!(
                "{}: dim[{}] = {d} must be at least 1",
                path.display(),
                axis + 1
            )));
        }
        dims[axis] = d as usize;
    }
    let spacing = [
        hdr.pixdim[1] as f64,
        hdr.pixdim[2] as f64,
        hdr.pixdim[3] as f64,
    ];
    if spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "{}: voxel spacing must be finite and positive (got {spacing:?})",
            path.display()
        )));
    }
    Ok((dims, spacing))
}

fn decode_voxels<E: ByteOrder>(raw: &[u8], datatype: i16, n: usize) -> Vec<f64> {
    match datatype {
        DT_UINT8 => raw.iter().map(|b| *b as f64).collect(),
        DT_INT16 => {
            let mut vals = vec![0i16; n];
            E::read_i16_into(raw, &mut vals);
            vals.into_iter().map(|v| v as f64).collect()
        }
        DT_INT32 => {
            let mut vals = vec![0i32; n];
            E::read_i32_into(raw, &mut vals);
            vals.into_iter().map(|v| v as f64).collect()
        }
        DT_FLOAT32 => {
            let mut vals = vec![0f32; n];
            E::read_f32_into(raw, &mut vals);
            vals.into_iter().map(|v| v as f64).collect()
        }
        DT_FLOAT64 => {
            let mut vals = vec![0f64; n];
            E::read_f64_into(raw, &mut vals);
            vals
        }
        _ => unreachable!("datatype validated before decoding"),
    }
}

/// Read a NIfTI-1 single-file image into a [`Volume3D`].
///
/// Intensities are converted to `f64`; when the header's scale slope is
/// nonzero, `slope * v + intercept` is applied per voxel (the NIfTI
/// convention treats slope 0 as "no scaling"). Non-finite voxels —
/// whether stored or produced by the scaling — are rejected rather than
/// propagated.
pub fn read_nifti<P: AsRef<Path>>(path: P) -> Result<Volume3D> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let (hdr, endian) = read_and_validate_header(reader.as_mut(), path)?;

    if datatype_name(hdr.datatype).is_none() {
        return Err(Error::UnsupportedDatatype(hdr.datatype));
    }
    let (dims, spacing) = header_geometry(&hdr, path)?;

    if !hdr.vox_offset.is_finite() || hdr.vox_offset < HEADER_SIZE as f32 {
        return Err(Error::Corrupt(format!(
            "{}: vox_offset {} is before the end of the header",
            path.display(),
            hdr.vox_offset
        )));
    }
    let skip = hdr.vox_offset as u64 - HEADER_SIZE as u64;
    std::io::copy(&mut reader.as_mut().take(skip), &mut std::io::sink())?;

    let n = dims[0] * dims[1] * dims[2];
    let mut raw = vec![0u8; n * bytes_per_voxel(hdr.datatype)];
    reader.read_exact(&mut raw).map_err(|e| {
        Error::Corrupt(format!(
            "{}: voxel data truncated (expected {} voxels: {e})",
            path.display(),
            n
        ))
    })?;

    let mut data = match endian {
        Endian::Little => decode_voxels::<LittleEndian>(&raw, hdr.datatype, n),
        Endian::Big => decode_voxels::<BigEndian>(&raw, hdr.datatype, n),
    };
    if hdr.scl_slope != 0.0 && (hdr.scl_slope != 1.0 || hdr.scl_inter != 0.0) {
        let slope = hdr.scl_slope as f64;
        let inter = hdr.scl_inter as f64;
        for v in &mut data {
            *v = slope * *v + inter;
        }
    }

    let orientation = Orientation {
        qfac: hdr.pixdim[0],
        qform_code: hdr.qform_code,
        sform_code: hdr.sform_code,
        quatern: hdr.quatern,
        qoffset: hdr.qoffset,
        srow: hdr.srow,
    };
    Volume3D::with_orientation(dims, spacing, orientation, data)
}

/// Read only the header summary of a NIfTI-1 file (no voxel data).
pub fn read_header<P: AsRef<Path>>(path: P) -> Result<HeaderInfo> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let (hdr, _) = read_and_validate_header(reader.as_mut(), path)?;
    let name = datatype_name(hdr.datatype)
        .ok_or(Error::UnsupportedDatatype(hdr.datatype))?;
    let (dims, spacing) = header_geometry(&hdr, path)?;
    Ok(HeaderInfo {
        dims,
        spacing,
        datatype_code: hdr.datatype,
        datatype_name: name,
    })
}

/// Summary of a NIfTI-1 header.
#[derive(Clone, Debug)]
pub struct HeaderInfo {
    /// Grid dimensions `(nx, ny, nz)`.
    pub dims: [usize; 3],
    /// Voxel spacing in millimetres.
    pub spacing: [f64; 3],
    /// NIfTI datatype code.
    pub datatype_code: i16,
    /// Human-readable datatype name.
    pub datatype_name: &'static str,
}

struct HeaderFields<'a> {
    dims: [usize; 3],
    spacing: [f64; 3],
    orientation: &'a Orientation,
    datatype: i16,
    bitpix: i16,
}

fn build_header(fields: &HeaderFields) -> Result<[u8; HEADER_SIZE]> {
    for &d in &fields.dims {
        if d > i16::MAX as usize {
            return Err(Error::InvalidGeometry(format!(
                "dimension {d} exceeds the NIfTI-1 limit of {}",
                i16::MAX
            )));
        }
    }
    let mut buf = [0u8; HEADER_SIZE];
    LittleEndian::write_i32(&mut buf[0..4], HEADER_SIZE as i32);
    // regular byte, kept for compatibility with ANALYZE-era tools.
    buf[38] = b'r';

    let dim: [i16; 8] = [
        3,
        fields.dims[0] as i16,
        fields.dims[1] as i16,
        fields.dims[2] as i16,
        1,
        1,
        1,
        1,
    ];
    LittleEndian::write_i16_into(&dim, &mut buf[40..56]);
    LittleEndian::write_i16(&mut buf[70..72], fields.datatype);
    LittleEndian::write_i16(&mut buf[72..74], fields.bitpix);

    let o = fields.orientation;
    let pixdim: [f32; 8] = [
        o.qfac,
        fields.spacing[0] as f32,
        fields.spacing[1] as f32,
        fields.spacing[2] as f32,
        1.0,
        1.0,
        1.0,
        1.0,
    ];
    LittleEndian::write_f32_into(&pixdim, &mut buf[76..108]);
    LittleEndian::write_f32(&mut buf[108..112], WRITE_VOX_OFFSET as f32);
    LittleEndian::write_f32(&mut buf[112..116], 1.0); // scl_slope
    LittleEndian::write_f32(&mut buf[116..120], 0.0); // scl_inter
    buf[123] = 2; // xyzt_units: millimetres

    LittleEndian::write_i16(&mut buf[252..254], o.qform_code);
    LittleEndian::write_i16(&mut buf[254..256], o.sform_code);
    LittleEndian::write_f32_into(&o.quatern, &mut buf[256..268]);
    LittleEndian::write_f32_into(&o.qoffset, &mut buf[268..280]);
    LittleEndian::write_f32_into(&o.srow[0], &mut buf[280..296]);
    LittleEndian::write_f32_into(&o.srow[1], &mut buf[296..312]);
    LittleEndian::write_f32_into(&o.srow[2], &mut buf[312..328]);
    buf[344..348].copy_from_slice(MAGIC_SINGLE);
    Ok(buf)
}

fn open_writer(path: &Path) -> Result<Box<dyn Write>> {
    let file = File::create(path)?;
    let buffered = BufWriter::new(file);
    if path
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.ends_with(".gz"))
    {
        Ok(Box::new(GzEncoder::new(buffered, Compression::default())))
    } else {
        Ok(Box::new(buffered))
    }
}

fn write_payload(path: &Path, header: &[u8; HEADER_SIZE], payload: &[u8]) -> Result<()> {
    let mut writer = open_writer(path)?;
    writer.write_all(header)?;
    // Four zero bytes: no header extensions; data starts at offset 352.
    writer.write_all(&[0u8; 4])?;
    writer.write_all(payload)?;
    writer.flush()?;
    Ok(())
}

/// Write a volume as a little-endian `float64` NIfTI-1 single-file image.
///
/// `.gz` suffixes are honored. Intensities are stored raw (slope 1,
/// intercept 0), so reading the file back reproduces the volume's data
/// bit-exactly; spacing survives at `f32` header precision.
pub fn write_nifti<P: AsRef<Path>>(path: P, vol: &Volume3D) -> Result<()> {
    let path = path.as_ref();
    let orientation = vol.orientation();
    let header = build_header(&HeaderFields {
        dims: vol.dims(),
        spacing: vol.spacing(),
        orientation: &orientation,
        datatype: DT_FLOAT64,
        bitpix: 64,
    })?;
    let mut payload = vec![0u8; vol.num_voxels() * 8];
    LittleEndian::write_f64_into(vol.data(), &mut payload);
    write_payload(path, &header, &payload)
}

/// Write a binary mask as a `uint8` NIfTI-1 single-file image (0/1
/// voxels, slope 1, intercept 0).
pub fn write_mask<P: AsRef<Path>>(path: P, mask: &BinaryMask) -> Result<()> {
    let path = path.as_ref();
    let orientation = mask.orientation();
    let header = build_header(&HeaderFields {
        dims: mask.dims(),
        spacing: mask.spacing(),
        orientation: &orientation,
        datatype: DT_UINT8,
        bitpix: 8,
    })?;
    let payload: Vec<u8> = mask.data().iter().map(|&b| b as u8).collect();
    write_payload(path, &header, &payload)
}
