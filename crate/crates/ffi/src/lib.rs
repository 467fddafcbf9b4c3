//! C ABI over the contact solvers and studies.
//!
//! Conventions:
//! * handles (`UcMesh`, `UcPenaltySolution`, `UcViSolution`, `UcRecords`)
//!   are opaque pointers owned by this library; every `uc_*_new`-style
//!   call has a matching `uc_*_free`;
//! * every fallible call returns a [`UcStatus`] and writes its result
//!   through out-pointers, which are left untouched on failure;
//! * panics are caught at the boundary and reported as
//!   `UC_STATUS_INTERNAL`.
//!
//! The matching C header lives in `include/unicontact.h` and is kept in
//! sync by the `header_lists_every_symbol` test.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use unicontact::cases::Benchmark;
use unicontact::contact::{solve_penalty, PenaltyConfig, PenaltyState};
use unicontact::error::Error;
use unicontact::mesh::{BoundaryTag, Mesh, SideTagging};
use unicontact::study::{
    render_csv, run_eps_study, run_h_study, ConvergenceRecord, StudyConfig, StudyMode,
};
use unicontact::vi::{solve_vi, VISolution};

/// Status codes shared with the C header.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    IoError = 4,
    BadEncoding = 5,
    OutOfRange = 6,
    Internal = 7,
}

fn status_of(e: &Error) -> UcStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::IllPosed(_) => {
            UcStatus::InvalidArgument
        }
        Error::OutOfDomain(_, _) => UcStatus::OutOfRange,
        Error::Io(_) => UcStatus::IoError,
        Error::Assembly(_) | Error::SingularSystem(_) | Error::NonConvergence { .. } => {
            UcStatus::SolverFailure
        }
    }
}

/// Opaque mesh handle.
pub struct UcMesh(Mesh);

/// Opaque penalty solution handle.
pub struct UcPenaltySolution(PenaltyState);

/// Opaque constrained (variational inequality) solution handle.
pub struct UcViSolution(VISolution);

/// Opaque list of study records.
pub struct UcRecords {
    records: Vec<ConvergenceRecord>,
}

/// Plain-old-data view of one study row.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UcRecord {
    pub level: u32,
    pub h: f64,
    pub epsilon: f64,
    pub h1_error: f64,
    pub energy_error: f64,
    pub l2_residual: f64,
    pub wres_l2: f64,
    pub wres_neg: f64,
    pub neg_norm_nu: f64,
    pub newton_iters: u64,
    /// NaN on the first row of a study.
    pub eoc_h1: f64,
    pub max_penetration: f64,
}

fn guard<F: FnOnce() -> UcStatus>(f: F) -> UcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => UcStatus::Internal,
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, UcStatus> {
    if ptr.is_null() {
        return Err(UcStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| UcStatus::BadEncoding)
}

fn benchmark(name: &str) -> Result<Benchmark, UcStatus> {
    Benchmark::from_name(name).map_err(|_| UcStatus::InvalidArgument)
}

fn default_tagging() -> SideTagging {
    SideTagging::contact_bottom(
        BoundaryTag::Dirichlet,
        BoundaryTag::Neumann,
        BoundaryTag::Dirichlet,
    )
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Human-readable name of a status code (static storage).
#[no_mangle]
pub extern "C" fn uc_status_name(status: UcStatus) -> *const c_char {
    let name: &'static str = match status {
        UcStatus::Ok => "ok\0",
        UcStatus::NullPointer => "null pointer\0",
        UcStatus::InvalidArgument => "invalid argument\0",
        UcStatus::SolverFailure => "solver failure\0",
        UcStatus::IoError => "i/o error\0",
        UcStatus::BadEncoding => "bad encoding\0",
        UcStatus::OutOfRange => "out of range\0",
        UcStatus::Internal => "internal error\0",
    };
    name.as_ptr() as *const c_char
}

/// Generates the structured contact mesh (bottom contact, Dirichlet
/// sides, Neumann top) with n subdivisions per side.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_generate(n: usize, out: *mut *mut UcMesh) -> UcStatus {
    if out.is_null() {
        return UcStatus::NullPointer;
    }
    guard(|| match Mesh::generate_structured_square(n, default_tagging()) {
        Ok(mesh) => {
            unsafe { *out = Box::into_raw(Box::new(UcMesh(mesh))) };
            UcStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Uniformly refines a mesh into a new handle.
///
/// # Safety
/// `mesh` must be a live handle from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_refine(mesh: *const UcMesh, out: *mut *mut UcMesh) -> UcStatus {
    if mesh.is_null() || out.is_null() {
        return UcStatus::NullPointer;
    }
    guard(|| {
        let child = unsafe { &*mesh }.0.refine_uniform();
        unsafe { *out = Box::into_raw(Box::new(UcMesh(child))) };
        UcStatus::Ok
    })
}

/// # Safety
/// `mesh` must be a live handle or null (null is a no-op).
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_free(mesh: *mut UcMesh) {
    if !mesh.is_null() {
        drop(unsafe { Box::from_raw(mesh) });
    }
}

/// # Safety
/// `mesh` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_num_nodes(mesh: *const UcMesh) -> usize {
    if mesh.is_null() {
        return 0;
    }
    unsafe { &*mesh }.0.num_nodes()
}

/// # Safety
/// `mesh` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_num_triangles(mesh: *const UcMesh) -> usize {
    if mesh.is_null() {
        return 0;
    }
    unsafe { &*mesh }.0.num_triangles()
}

/// Maximum triangle diameter, or NaN for a null handle.
///
/// # Safety
/// `mesh` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_h(mesh: *const UcMesh) -> f64 {
    if mesh.is_null() {
        return f64::NAN;
    }
    unsafe { &*mesh }.0.h()
}

/// Writes the plain-text mesh format.
///
/// # Safety
/// `mesh` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_write_text(mesh: *const UcMesh, path: *const c_char) -> UcStatus {
    if mesh.is_null() {
        return UcStatus::NullPointer;
    }
    let path = match unsafe { cstr(path) } {
        Ok(p) => PathBuf::from(p),
        Err(s) => return s,
    };
    guard(|| match unsafe { &*mesh }.0.write_text(&path) {
        Ok(()) => UcStatus::Ok,
        Err(e) => status_of(&e),
    })
}

/// Reads the plain-text mesh format into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uc_mesh_read_text(path: *const c_char, out: *mut *mut UcMesh) -> UcStatus {
    if out.is_null() {
        return UcStatus::NullPointer;
    }
    let path = match unsafe { cstr(path) } {
        Ok(p) => PathBuf::from(p),
        Err(s) => return s,
    };
    guard(|| match Mesh::read_text(&path) {
        Ok(mesh) => {
            unsafe { *out = Box::into_raw(Box::new(UcMesh(mesh))) };
            UcStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Solves the penalty problem for a named benchmark case
/// (patch, flat_punch or tension) on the n-by-n mesh.
///
/// # Safety
/// `case` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uc_solve_penalty(
    case: *const c_char,
    n: usize,
    epsilon: f64,
    out: *mut *mut UcPenaltySolution,
) -> UcStatus {
    if out.is_null() {
        return UcStatus::NullPointer;
    }
    let name = match unsafe { cstr(case) } {
        Ok(s) => s,
        Err(s) => return s,
    };
    guard(|| {
        let bench = match benchmark(name) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let pen_case = bench.penalty_case(epsilon);
        let mesh = match pen_case.mesh(n) {
            Ok(m) => m,
            Err(e) => return status_of(&e),
        };
        match solve_penalty(&mesh, &pen_case, &PenaltyConfig::new(epsilon)) {
            Ok(state) => {
                unsafe { *out = Box::into_raw(Box::new(UcPenaltySolution(state))) };
                UcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of displacement entries (2 per node).
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_penalty_len(sol: *const UcPenaltySolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    unsafe { &*sol }.0.displacement.len()
}

/// Copies the displacement vector into a caller buffer of length `len`.
///
/// # Safety
/// `sol` must be a live handle; `buffer` must point to at least `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn uc_penalty_displacement(
    sol: *const UcPenaltySolution,
    buffer: *mut f64,
    len: usize,
) -> UcStatus {
    if sol.is_null() || buffer.is_null() {
        return UcStatus::NullPointer;
    }
    let disp = &unsafe { &*sol }.0.displacement;
    if len < disp.len() {
        return UcStatus::OutOfRange;
    }
    unsafe { std::ptr::copy_nonoverlapping(disp.as_ptr(), buffer, disp.len()) };
    UcStatus::Ok
}

/// Newton iterations performed.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_penalty_iterations(sol: *const UcPenaltySolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    unsafe { &*sol }.0.iterations
}

/// Largest penetration max [u_n]_+ over the contact nodes.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_penalty_max_penetration(sol: *const UcPenaltySolution) -> f64 {
    if sol.is_null() {
        return f64::NAN;
    }
    unsafe { &*sol }.0.max_penetration()
}

/// # Safety
/// `sol` must be a live handle or null (null is a no-op).
#[no_mangle]
pub unsafe extern "C" fn uc_penalty_free(sol: *mut UcPenaltySolution) {
    if !sol.is_null() {
        drop(unsafe { Box::from_raw(sol) });
    }
}

/// Solves the constrained reference problem for a named benchmark case.
///
/// # Safety
/// `case` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uc_solve_vi(
    case: *const c_char,
    n: usize,
    out: *mut *mut UcViSolution,
) -> UcStatus {
    if out.is_null() {
        return UcStatus::NullPointer;
    }
    let name = match unsafe { cstr(case) } {
        Ok(s) => s,
        Err(s) => return s,
    };
    guard(|| {
        let bench = match benchmark(name) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let vi_case = bench.vi_case();
        let mesh = match vi_case.mesh(n) {
            Ok(m) => m,
            Err(e) => return status_of(&e),
        };
        match solve_vi(&mesh, &vi_case, 1e-10) {
            Ok(sol) => {
                unsafe { *out = Box::into_raw(Box::new(UcViSolution(sol))) };
                UcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of displacement entries (2 per node).
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_vi_len(sol: *const UcViSolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    unsafe { &*sol }.0.displacement.len()
}

/// Copies the displacement vector into a caller buffer of length `len`.
///
/// # Safety
/// `sol` must be a live handle; `buffer` must point to at least `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn uc_vi_displacement(
    sol: *const UcViSolution,
    buffer: *mut f64,
    len: usize,
) -> UcStatus {
    if sol.is_null() || buffer.is_null() {
        return UcStatus::NullPointer;
    }
    let disp = &unsafe { &*sol }.0.displacement;
    if len < disp.len() {
        return UcStatus::OutOfRange;
    }
    unsafe { std::ptr::copy_nonoverlapping(disp.as_ptr(), buffer, disp.len()) };
    UcStatus::Ok
}

/// Total contact force Σ λ_i.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_vi_total_contact_force(sol: *const UcViSolution) -> f64 {
    if sol.is_null() {
        return f64::NAN;
    }
    unsafe { &*sol }.0.total_contact_force()
}

/// Number of active contact nodes.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_vi_active_count(sol: *const UcViSolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    unsafe { &*sol }.0.active.iter().filter(|&&a| a).count()
}

/// # Safety
/// `sol` must be a live handle or null (null is a no-op).
#[no_mangle]
pub unsafe extern "C" fn uc_vi_free(sol: *mut UcViSolution) {
    if !sol.is_null() {
        drop(unsafe { Box::from_raw(sol) });
    }
}

/// Runs a convergence study. `mode` is "h" or "eps"; the patch case in h
/// mode compares against its closed form.
///
/// # Safety
/// `case` and `mode` must be NUL-terminated strings; `out` a valid
/// pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn uc_run_study(
    case: *const c_char,
    mode: *const c_char,
    level_min: u32,
    level_max: u32,
    theta: f64,
    eps_scale: f64,
    nu: f64,
    ref_offset: u32,
    eps0: f64,
    eps_steps: usize,
    out: *mut *mut UcRecords,
) -> UcStatus {
    if out.is_null() {
        return UcStatus::NullPointer;
    }
    let case_name = match unsafe { cstr(case) } {
        Ok(s) => s,
        Err(s) => return s,
    };
    let mode_name = match unsafe { cstr(mode) } {
        Ok(s) => s,
        Err(s) => return s,
    };
    guard(|| {
        let bench = match benchmark(case_name) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let mode = match (mode_name, &bench) {
            ("eps", _) => StudyMode::EpsStudy,
            ("h", Benchmark::Patch { .. }) => StudyMode::Patch,
            ("h", _) => StudyMode::HStudy,
            _ => return UcStatus::InvalidArgument,
        };
        let mut cfg = StudyConfig::new(bench, mode);
        cfg.level_min = level_min;
        cfg.level_max = level_max;
        cfg.theta = theta;
        cfg.eps_scale = eps_scale;
        cfg.nu = nu;
        cfg.ref_offset = ref_offset;
        cfg.eps0 = eps0;
        cfg.eps_steps = eps_steps;
        if let Err(e) = cfg.validate() {
            return status_of(&e);
        }
        let result = match cfg.mode {
            StudyMode::EpsStudy => run_eps_study(&cfg),
            _ => run_h_study(&cfg),
        };
        match result {
            Ok(records) => {
                unsafe { *out = Box::into_raw(Box::new(UcRecords { records })) };
                UcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of rows in a study result.
///
/// # Safety
/// `recs` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uc_records_len(recs: *const UcRecords) -> usize {
    if recs.is_null() {
        return 0;
    }
    unsafe { &*recs }.records.len()
}

/// Copies row `index` into `out`.
///
/// # Safety
/// `recs` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uc_records_get(
    recs: *const UcRecords,
    index: usize,
    out: *mut UcRecord,
) -> UcStatus {
    if recs.is_null() || out.is_null() {
        return UcStatus::NullPointer;
    }
    let records = &unsafe { &*recs }.records;
    let Some(r) = records.get(index) else {
        return UcStatus::OutOfRange;
    };
    unsafe {
        *out = UcRecord {
            level: r.level,
            h: r.h,
            epsilon: r.epsilon,
            h1_error: r.h1_error,
            energy_error: r.energy_error,
            l2_residual: r.l2_residual,
            wres_l2: r.wres_l2,
            wres_neg: r.wres_neg,
            neg_norm_nu: r.neg_norm_nu,
            newton_iters: r.newton_iters as u64,
            eoc_h1: r.eoc_h1.unwrap_or(f64::NAN),
            max_penetration: r.max_penetration,
        };
    }
    UcStatus::Ok
}

/// Writes the rows in the fixed CSV schema.
///
/// # Safety
/// `recs` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uc_records_write_csv(
    recs: *const UcRecords,
    path: *const c_char,
) -> UcStatus {
    if recs.is_null() {
        return UcStatus::NullPointer;
    }
    let path = match unsafe { cstr(path) } {
        Ok(p) => PathBuf::from(p),
        Err(s) => return s,
    };
    guard(|| {
        let csv = render_csv(&unsafe { &*recs }.records);
        match std::fs::write(&path, csv) {
            Ok(()) => UcStatus::Ok,
            Err(_) => UcStatus::IoError,
        }
    })
}

/// # Safety
/// `recs` must be a live handle or null (null is a no-op).
#[no_mangle]
pub unsafe extern "C" fn uc_records_free(recs: *mut UcRecords) {
    if !recs.is_null() {
        drop(unsafe { Box::from_raw(recs) });
    }
}
