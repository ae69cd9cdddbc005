"""Full published-data comparison for the lid-driven cavity at Wi = 0.5.

Runs the three ratio-graded benchmark meshes to t = 10 and tabulates the
computed midline stress peak, global stress maximum and main-vortex
position against the published reference values.  Expect roughly 5 to 20
minutes per mesh depending on the machine.

The same comparison is available from the command line:

    oldroydb bench --wi 0.5 --meshes ratio:90 ratio:120 ratio:150
"""

from oldroydb.cli import run_benchmark_suite

rows = run_benchmark_suite(wi=0.5, mesh_specs=["ratio:90", "ratio:120", "ratio:150"],
                           out_dir="out_benchmark")

print(f"\n{'mesh':<10} {'max ln s11':>11} {'published':>10} {'max s11':>9} "
      f"{'published':>10} {'vortex center':>18}")
for row in rows:
    if row["status"] != "ok":
        print(f"{row['mesh']:<10} {row['status']}")
        continue
    vc = row["vortex_center"]
    print(f"{row['mesh']:<10} {row['max_ln_s11_midline']:>11.3f} "
          f"{row.get('published_max_ln_s11_midline', float('nan')):>10.2f} "
          f"{row['max_s11_global']:>9.1f} "
          f"{row.get('published_max_s11_global', float('nan')):>10.2f} "
          f"({vc[0]:.3f}, {vc[1]:.3f})")

print("\nfull report in out_benchmark/bench_report.md")
