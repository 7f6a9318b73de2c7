import pytest

from momentrec import cli
from momentrec.exact import Polynomial


def k_poly(*coeffs):
    return Polynomial(list(coeffs), "k")


def lin(c, var="k"):
    return Polynomial([c, 1], var)


def prod(*ps):
    out = ps[0]
    for p in ps[1:]:
        out = out * p
    return out


@pytest.fixture
def run_cli(capsys):
    def run(*argv):
        try:
            code = cli.main(list(argv))
        except SystemExit as exc:  # argparse errors and --version
            code = exc.code
        out = capsys.readouterr()
        return code, out.out, out.err

    return run
