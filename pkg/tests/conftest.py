import pytest


def pytest_runtest_logreport(report):
    """One pass/fail line per acceptance criterion as it completes."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance] {outcome} {name}", flush=True)


@pytest.fixture(scope="session")
def tiny_synth():
    """Small planted benchmark shared by harness tests."""
    from oqfs.corpus import build_collection
    from oqfs.harness.synth import SynthSpec, generate_synth

    spec = SynthSpec(
        n_clusters=4, relevant_per_cluster=10, n_noise_docs=150, seed=7
    )
    docs, clusters = generate_synth(spec)
    membership = {
        doc_id: c.cluster_id for c in clusters for doc_id in c.member_doc_ids
    }
    collection = build_collection(docs, "SYNTH", doc_membership=membership)
    return collection, clusters
