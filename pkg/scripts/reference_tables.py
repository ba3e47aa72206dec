"""Check the bundled reference solutions and print their tables and failure summaries."""

from rwnca.io import reference_solution, render_report
from rwnca.model import DesignSpec
from rwnca.topology import cost239
from rwnca.validator import metrics, simulate_failures, validate


def main():
    t = cost239()
    for design in (4, 5):
        sf = reference_solution(design)
        inst = sf.instance(t)
        rep = validate(inst, DesignSpec.for_design(design, len(inst.demands)), sf.solution)
        fail = simulate_failures(inst, sf.solution)
        m = metrics(inst, sf.solution)
        print(f"## Design {design}, destination 3\n")
        print(render_report(sf))
        print(f"violations {len(rep.violations)}; wavelengths {m.wavelength_count}, "
              f"client-side {m.client_side_count}, transponders {m.transponder_count}")
        print("single-fiber failures: " + ", ".join(f"{k} {v}" for k, v in sorted(fail.summary().items())) + "\n")


if __name__ == "__main__":
    main()
