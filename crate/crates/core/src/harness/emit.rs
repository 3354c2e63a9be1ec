//! C source emission.

use std::fmt::Write as _;

use super::cexpr::{c_literal, render_condition, saved_globals, PRE_PREFIX};
use super::{
    natural_cmp, Backend, HarnessContext, HarnessError, HarnessGroup, HarnessSpec, SymbolicVar, TestVector,
    VectorValue,
};
use crate::knowledge::{augment_dictionary, DataDictionaryEntry, ValueType};
use crate::ltl::{collect_vars, Value};

pub fn harness_file_name(ip_name: &str, backend: Backend, group: &HarnessGroup) -> String {
    format!("{ip_name}_{backend}_{}.c", group.key_hash8())
}

pub fn safety_file_name(ip_name: &str, backend: Backend) -> String {
    format!("{ip_name}_{backend}_safety.c")
}

fn c_type(t: ValueType) -> &'static str {
    match t {
        ValueType::Uint8Buffer | ValueType::Uint8 => "uint8_t",
        ValueType::Uint16 => "uint16_t",
        ValueType::Uint32 => "uint32_t",
        ValueType::Int32 => "int32_t",
        ValueType::Int64 => "int64_t",
        ValueType::Float32 => "float",
        ValueType::Float64 => "double",
        ValueType::Bool => "_Bool",
    }
}

fn declare(v: &SymbolicVar) -> String {
    match v.buffer_len {
        Some(n) if v.is_buffer => format!("{} {}[{n}]", c_type(v.value_type), v.name),
        _ => format!("{} {}", c_type(v.value_type), v.name),
    }
}

/// Nondeterministic-value generator name and its return type.
fn nondet(backend: Backend, t: ValueType) -> (String, &'static str) {
    let t = if t.is_buffer() { ValueType::Uint8 } else { t };
    match backend {
        Backend::Cpachecker => {
            let (suffix, ret) = match t {
                ValueType::Uint8 => ("uchar", "unsigned char"),
                ValueType::Uint16 => ("ushort", "unsigned short"),
                ValueType::Uint32 => ("uint", "unsigned int"),
                ValueType::Int32 => ("int", "int"),
                ValueType::Int64 => ("longlong", "long long"),
                ValueType::Float32 => ("float", "float"),
                ValueType::Float64 => ("double", "double"),
                _ => ("bool", "_Bool"),
            };
            (format!("__VERIFIER_nondet_{suffix}"), ret)
        }
        _ => {
            let suffix = match t {
                ValueType::Float32 => "float",
                ValueType::Float64 => "double",
                ValueType::Bool => "bool",
                other => c_type(other),
            };
            (format!("nondet_{suffix}"), c_type(t))
        }
    }
}

fn header_comment(out: &mut String, title: &str, lines: &[String]) {
    out.push_str("/* ");
    out.push_str(title);
    for l in lines {
        out.push_str("\n * ");
        out.push_str(l);
    }
    out.push_str("\n */\n");
}

fn includes(out: &mut String, system: &[&str], spec: &HarnessSpec) {
    for s in system {
        let _ = writeln!(out, "#include <{s}>");
    }
    for h in &spec.header_includes {
        let _ = writeln!(out, "#include \"{h}\"");
    }
    out.push('\n');
}

fn extern_globals(out: &mut String, spec: &HarnessSpec) {
    let mut any = false;
    for v in spec.globals() {
        let _ = writeln!(out, "extern {};", declare(v));
        any = true;
    }
    if any {
        out.push('\n');
    }
}

fn call_line(spec: &HarnessSpec) -> String {
    let args: Vec<&str> = spec.input_ports().map(|v| v.name.as_str()).collect();
    format!("    {} = {}({});\n", spec.return_var.name, spec.entry_symbol, args.join(", "))
}

fn c_string(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn check_grounded(spec: &HarnessSpec, dict: &[DataDictionaryEntry]) -> Result<(), HarnessError> {
    let dict = augment_dictionary(dict, &spec.entry_symbol);
    let conditions = spec.preconditions.iter().chain(spec.postconditions.iter().map(|a| &a.condition));
    for c in conditions {
        for v in collect_vars(&c.expr) {
            if !dict.iter().any(|e| e.name == v.name) {
                return Err(HarnessError::UngroundedVariable(v.name));
            }
        }
    }
    Ok(())
}

/// Emits a verification harness for one property group.
pub fn emit_harness(group: &HarnessGroup, dict: &[DataDictionaryEntry], backend: Backend) -> Result<String, HarnessError> {
    if backend == Backend::Trace {
        return Err(HarnessError::UnsupportedBackend("trace harnesses are built from test vectors".into()));
    }
    let spec = &group.spec;
    check_grounded(spec, dict)?;
    let assumes = spec.preconditions.iter().map(|c| render_condition(c, spec)).collect::<Result<Vec<_>, _>>()?;
    let mut asserts = Vec::new();
    for a in &spec.postconditions {
        asserts.push((render_condition(&a.condition, spec)?, a.property.as_str()));
    }
    asserts.sort_by(|a, b| natural_cmp(a.1, b.1));

    let mut out = String::new();
    let mut members = group.members.clone();
    members.sort_by(|a, b| natural_cmp(a, b));
    header_comment(
        &mut out,
        &format!("{} verification harness ({backend})", spec.ip_name),
        &[format!("preconditions: {}", group.key), format!("properties: {}", members.join(", "))],
    );
    body(&mut out, spec, backend, &assumes, &asserts);
    Ok(out)
}

/// Emits a harness with no assumptions or assertions, for the tools' own
/// runtime-error checks.
pub fn emit_safety_harness(ctx: &HarnessContext, backend: Backend) -> Result<String, HarnessError> {
    if backend == Backend::Trace {
        return Err(HarnessError::UnsupportedBackend("trace".into()));
    }
    let group = ctx.safety_group();
    let mut out = String::new();
    header_comment(&mut out, &format!("{} safety harness ({backend})", ctx.ip_name), &[]);
    body(&mut out, &group.spec, backend, &[], &[]);
    Ok(out)
}

fn body(out: &mut String, spec: &HarnessSpec, backend: Backend, assumes: &[String], asserts: &[(String, &str)]) {
    includes(out, &["stdint.h", "assert.h"], spec);
    let mut types: Vec<ValueType> = spec.symbolic_vars.iter().map(|v| if v.is_buffer { ValueType::Uint8 } else { v.value_type }).collect();
    types.sort_by_key(|t| *t as u8);
    types.dedup();

    match backend {
        Backend::Cbmc => {
            out.push_str("#define __ASSUME(cond) __CPROVER_assume(cond)\n");
            out.push_str("#define __ASSERT(cond, msg) __CPROVER_assert(cond, msg)\n\n");
            for t in &types {
                let (name, ret) = nondet(backend, *t);
                let _ = writeln!(out, "{ret} {name}(void);");
            }
        }
        Backend::Cpachecker => {
            out.push_str("extern void __VERIFIER_assume(int cond);\n");
            for t in &types {
                let (name, ret) = nondet(backend, *t);
                let _ = writeln!(out, "extern {ret} {name}(void);");
            }
            out.push_str("void reach_error(void) { assert(0); }\n\n");
            out.push_str("#define __ASSUME(cond) __VERIFIER_assume(cond)\n");
            out.push_str("#define __ASSERT(cond, msg) do { if (!(cond)) reach_error(); } while (0)\n");
        }
        Backend::Klee => {
            out.push_str("extern void klee_make_symbolic(void *addr, unsigned long nbytes, const char *name);\n");
            out.push_str("extern void klee_assume(unsigned long condition);\n\n");
            out.push_str("#define __ASSUME(cond) klee_assume(cond)\n");
            out.push_str("#define __ASSERT(cond, msg) do { if (!(cond)) assert(0 && (msg)); } while (0)\n");
        }
        Backend::Trace => unreachable!(),
    }
    out.push('\n');
    extern_globals(out, spec);

    out.push_str("int main(void)\n{\n");
    for v in spec.input_ports().chain(std::iter::once(&spec.return_var)) {
        let _ = writeln!(out, "    {};", declare(v));
    }
    let has_buffer = spec.symbolic_vars.iter().any(|v| v.is_buffer);
    if has_buffer && backend != Backend::Klee {
        out.push_str("    int __i;\n");
    }
    out.push('\n');

    for v in spec.input_ports().chain(spec.globals()) {
        match backend {
            Backend::Klee if v.is_buffer => {
                let _ = writeln!(out, "    klee_make_symbolic({0}, sizeof({0}), \"{0}\");", v.name);
            }
            Backend::Klee => {
                let _ = writeln!(out, "    klee_make_symbolic(&{0}, sizeof({0}), \"{0}\");", v.name);
            }
            _ if v.is_buffer => {
                let (f, _) = nondet(backend, v.value_type);
                let n = v.buffer_len.unwrap_or(0);
                let _ = writeln!(out, "    for (__i = 0; __i < {n}; __i++) {{\n        {}[__i] = {f}();\n    }}", v.name);
            }
            _ => {
                let (f, _) = nondet(backend, v.value_type);
                let _ = writeln!(out, "    {} = {f}();", v.name);
            }
        }
    }

    if !assumes.is_empty() {
        out.push('\n');
        for a in assumes {
            let _ = writeln!(out, "    __ASSUME({a});");
        }
    }

    let saved = saved_globals(spec);
    if !saved.is_empty() {
        out.push('\n');
        for v in spec.globals().filter(|v| saved.contains(&v.name)) {
            let _ = writeln!(out, "    const {} {PRE_PREFIX}{1} = {1};", c_type(v.value_type), v.name);
        }
    }

    out.push('\n');
    out.push_str(&call_line(spec));
    let ret = &spec.return_var.name;
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    let uses_ret = asserts.iter().any(|(cond, _)| {
        cond.match_indices(ret.as_str()).any(|(i, _)| {
            !cond[..i].chars().next_back().is_some_and(is_ident) && !cond[i + ret.len()..].chars().next().is_some_and(is_ident)
        })
    });
    if !uses_ret {
        let _ = writeln!(out, "    (void){ret};");
    }
    if !asserts.is_empty() {
        out.push('\n');
        for (cond, id) in asserts {
            let _ = writeln!(out, "    __ASSERT({cond}, {});", c_string(id));
        }
    }
    out.push_str("    return 0;\n}\n");
}

fn printf_spec(t: ValueType, expr: &str) -> (String, String) {
    match t {
        ValueType::Int32 => ("%ld".into(), format!("(long){expr}")),
        ValueType::Int64 => ("%lld".into(), format!("(long long){expr}")),
        ValueType::Float32 | ValueType::Float64 => ("%.17g".into(), format!("(double){expr}")),
        ValueType::Bool => ("%s".into(), format!("{expr} ? \"true\" : \"false\"")),
        _ => ("%lu".into(), format!("(unsigned long){expr}")),
    }
}

fn check_vector_value(v: &SymbolicVar, value: &VectorValue, index: usize) -> Result<String, HarnessError> {
    let bad = |reason: String| HarnessError::InvalidVector { index, reason };
    match value {
        VectorValue::Bytes(bytes) => {
            if !v.is_buffer {
                return Err(bad(format!("`{}` is a scalar but was given an array", v.name)));
            }
            let n = v.buffer_len.unwrap_or(0);
            if bytes.len() != n {
                return Err(bad(format!("`{}` needs {n} bytes, got {}", v.name, bytes.len())));
            }
            let items: Vec<String> = bytes.iter().map(u8::to_string).collect();
            Ok(items.join(", "))
        }
        VectorValue::Scalar(_) if v.is_buffer => Err(bad(format!("`{}` is a buffer and needs an array", v.name))),
        VectorValue::Scalar(x) if v.value_type.is_float() => Ok(c_literal(Value::Float(x.as_f64()))),
        VectorValue::Scalar(x) => {
            let (lo, hi) = v.value_type.int_range().expect("integer type");
            match x.as_i128() {
                Some(i) if (lo..=hi).contains(&i) => Ok(c_literal(*x)),
                Some(i) => Err(bad(format!("{i} is out of range for `{}` ({})", v.name, v.value_type))),
                None => Err(bad(format!("`{}` is an integer but was given {x}", v.name))),
            }
        }
    }
}

/// Emits an instrumented driver that runs each vector through the entry
/// function and prints the pre/post states as JSON Lines.
pub fn emit_trace_harness(group: &HarnessGroup, vectors: &[TestVector]) -> Result<String, HarnessError> {
    let spec = &group.spec;
    let mut out = String::new();
    header_comment(
        &mut out,
        &format!("{} trace harness", spec.ip_name),
        &[format!("vectors: {}", vectors.len())],
    );
    includes(&mut out, &["stdint.h", "stdio.h"], spec);

    if vectors.is_empty() {
        out.push_str("int main(void)\n{\n    return 0;\n}\n");
        return Ok(out);
    }

    // Validate first so no partial source is produced.
    let mut assigned: Vec<Vec<(&SymbolicVar, String)>> = Vec::new();
    for (index, vector) in vectors.iter().enumerate() {
        if let Some(unknown) = vector.keys().find(|k| !spec.symbolic_vars.iter().any(|v| &&v.name == k)) {
            return Err(HarnessError::InvalidVector { index, reason: format!("unknown variable `{unknown}`") });
        }
        let mut row = Vec::new();
        for v in &spec.symbolic_vars {
            let value = vector.get(&v.name).ok_or_else(|| HarnessError::UngroundedVariable(v.name.clone()))?;
            row.push((v, check_vector_value(v, value, index)?));
        }
        assigned.push(row);
    }

    extern_globals(&mut out, spec);
    // File scope so the state printer sees the inputs too.
    for v in spec.input_ports().chain(std::iter::once(&spec.return_var)) {
        let _ = writeln!(out, "static {};", declare(v));
    }
    out.push('\n');

    let scalars: Vec<&SymbolicVar> = spec.symbolic_vars.iter().filter(|v| !v.is_buffer).collect();
    out.push_str("static void __print_state(void)\n{\n");
    for (k, v) in scalars.iter().enumerate() {
        let (fmt, arg) = printf_spec(v.value_type, &v.name);
        let sep = if k == 0 { "" } else { ", " };
        let _ = writeln!(out, "    printf(\"{sep}\\\"{}\\\": {fmt}\", {arg});", v.name);
    }
    out.push_str("}\n\n");

    out.push_str("int main(void)\n{\n");
    let has_buffer = spec.symbolic_vars.iter().any(|v| v.is_buffer);
    if has_buffer {
        out.push_str("    int __i;\n");
    }
    let sep = if scalars.is_empty() { "" } else { ", " };
    let (ret_fmt, ret_arg) = printf_spec(spec.return_var.value_type, &spec.return_var.name);

    for (index, row) in assigned.iter().enumerate() {
        let _ = writeln!(out, "\n    /* vector {index} */");
        for (v, value) in row {
            if v.is_buffer {
                let n = v.buffer_len.unwrap_or(0);
                let _ = writeln!(
                    out,
                    "    {{\n        static const uint8_t __v[{n}] = {{{value}}};\n        for (__i = 0; __i < {n}; __i++) {{\n            {}[__i] = __v[__i];\n        }}\n    }}",
                    v.name
                );
            } else {
                let _ = writeln!(out, "    {} = {value};", v.name);
            }
        }
        out.push_str("    printf(\"{\\\"pre\\\": {\");\n    __print_state();\n    printf(\"}}\\n\");\n");
        out.push_str(&call_line(spec));
        out.push_str("    printf(\"{\\\"post\\\": {\");\n    __print_state();\n");
        let _ = writeln!(
            out,
            "    printf(\"{sep}\\\"{}\\\": {ret_fmt}}}, \\\"label\\\": \\\"v{index}\\\"}}\\n\", {ret_arg});",
            spec.return_var.name
        );
    }
    out.push_str("    return 0;\n}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::ctx;
    use super::super::{group_properties, Condition, HarnessProperty, Role};
    use super::*;

    fn group() -> HarnessGroup {
        let p = HarnessProperty {
            id: "P1".into(),
            pre: vec![Condition::parse("x != 19", Role::Pre).unwrap()],
            post: vec![
                Condition::parse("y' == y + 1", Role::Post).unwrap(),
                Condition::parse("__ret' == FALSE", Role::Post).unwrap(),
            ],
        };
        group_properties(&[p], &ctx()).remove(0)
    }

    #[test]
    fn cbmc_harness_shape() {
        let c = emit_harness(&group(), &ctx().dictionary, Backend::Cbmc).unwrap();
        assert!(c.contains("__CPROVER_assume(cond)"));
        assert!(c.contains("    __ASSUME((x != 19));\n"));
        assert!(c.contains("    const int32_t __pre_y = y;\n"));
        assert!(c.contains("    __ret = DemoFun(x);\n"));
        assert!(c.contains("    __ASSERT((y == (__pre_y + 1)), \"P1\");\n"));
        assert!(c.contains("extern int32_t y;\n"));
        assert!(c.find("__ASSUME((x").unwrap() < c.find("__pre_y = y").unwrap());
        assert!(c.find("__pre_y = y").unwrap() < c.find("DemoFun(x)").unwrap());
    }

    #[test]
    fn klee_and_cpachecker_mappings() {
        let k = emit_harness(&group(), &ctx().dictionary, Backend::Klee).unwrap();
        assert!(k.contains("klee_make_symbolic(&x, sizeof(x), \"x\");"));
        assert!(k.contains("do { if (!(cond)) assert(0 && (msg)); } while (0)"));
        let p = emit_harness(&group(), &ctx().dictionary, Backend::Cpachecker).unwrap();
        assert!(p.contains("x = __VERIFIER_nondet_uint();"));
        assert!(p.contains("if (!(cond)) reach_error();"));
    }

    #[test]
    fn trace_backend_rejected_for_verification() {
        assert!(matches!(
            emit_harness(&group(), &ctx().dictionary, Backend::Trace),
            Err(HarnessError::UnsupportedBackend(_))
        ));
    }

    #[test]
    fn ungrounded_dictionary() {
        let mut dict = ctx().dictionary;
        dict.retain(|e| e.name != "y");
        assert_eq!(
            emit_harness(&group(), &dict, Backend::Cbmc),
            Err(HarnessError::UngroundedVariable("y".into()))
        );
    }

    #[test]
    fn trace_harness_vectors() {
        let g = ctx().safety_group();
        let empty = emit_trace_harness(&g, &[]).unwrap();
        assert!(empty.ends_with("int main(void)\n{\n    return 0;\n}\n"));

        let mut v = TestVector::new();
        v.insert("x".into(), VectorValue::Scalar(Value::Int(19)));
        assert_eq!(emit_trace_harness(&g, &[v.clone()]), Err(HarnessError::UngroundedVariable("y".into())));
        v.insert("y".into(), VectorValue::Scalar(Value::Int(-3)));
        let src = emit_trace_harness(&g, &[v.clone()]).unwrap();
        assert!(src.contains("    x = 19;\n    y = -3;\n"));
        assert!(src.contains("\\\"label\\\": \\\"v0\\\""));

        v.insert("x".into(), VectorValue::Scalar(Value::Int(-1)));
        assert!(matches!(emit_trace_harness(&g, &[v]), Err(HarnessError::InvalidVector { index: 0, .. })));
    }

    #[test]
    fn safety_has_no_contract() {
        let c = emit_safety_harness(&ctx(), Backend::Cbmc).unwrap();
        assert!(!c.contains("__ASSUME(("));
        assert!(!c.contains("__ASSERT(("));
        assert!(c.contains("(void)__ret;"));
    }
}
