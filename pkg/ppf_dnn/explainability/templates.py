from jinja2 import Template


COMPARISON_TEMPLATE = Template("""## Mode Comparison - {{ case }}

**Protocol**: {{ protocol }} | **Seed**: {{ seed }}

| Mode | V_loss | P_vm | P_va | P_pf | P_qf | Epochs | s/epoch | Stop |
|------|--------|------|------|------|------|--------|---------|------|
{% for r in rows %}| {{ r.mode }} | {{ r.v_loss }} | {{ r.p_vm }} | {{ r.p_va }} | {{ r.p_pf }} | {{ r.p_qf }} | {{ r.n_epoch }} | {{ r.seconds }} | {{ r.stop }} |
{% endfor %}
{% if failures %}
### Failed Modes
{% for f in failures %}
- {{ f.mode }}: {{ f.error }}
{% endfor %}
{% endif %}
{% if best %}
**Best**: {{ best }}
{% endif %}
""")


PPF_TEMPLATE = Template("""## PPF Summary - {{ case }}

**Engine**: {{ engine }} | **Samples**: {{ n_samples }} | **Evaluation**: {{ seconds }}

| Quantity | Elements | Mean range | Max std |{% if deltas %} Max mean delta | Max std delta |{% endif %}
|----------|----------|------------|---------|{% if deltas %}----------------|---------------|{% endif %}
{% for q in quantities %}| {{ q.name }} | {{ q.n }} | {{ q.mean_range }} | {{ q.max_std }} |{% if deltas %} {{ q.mean_delta }} | {{ q.std_delta }} |{% endif %}
{% endfor %}
{% if metrics %}
### Accuracy ({{ metrics.split }}, {{ metrics.n_samples }} samples)
- P_vm: {{ metrics.p_vm }}
- P_va: {{ metrics.p_va }}
- P_pf: {{ metrics.p_pf }}
- P_qf: {{ metrics.p_qf }}
{% endif %}
""")


BENCH_TEMPLATE = Template("""## Speed - {{ case }}

| Engine | Samples | Seconds | Speedup |
|--------|---------|---------|---------|
| dnn | {{ n }} | {{ dnn }} | 1.0x |
| nr | {{ n }} | {{ nr }} | {{ speedup }} |
{% if nr_parallel %}| nr ({{ workers }} workers) | {{ n }} | {{ nr_parallel }} | {{ parallel_speedup }} |
{% endif %}
""")
