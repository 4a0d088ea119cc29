"""figure_kit <kind> --csv PATH --out PATH [--theory-order p]"""

from __future__ import annotations

import sys

import click

from .render import KINDS, FigureKitError, FigureSpec, render


@click.command()
@click.argument("kind", type=click.Choice(KINDS))
@click.option("--csv", "csv_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--theory-order", type=int, default=None, help="order p for the dotted speedup bound (p^2+4)/(4p)")
@click.option("--title", default="")
def cli(kind, csv_paths, out, theory_order, title):
    """Render one figure of the given kind from bench/analyze CSV files."""
    spec = FigureSpec(
        kind=kind,
        csv_paths=list(csv_paths),
        out_path=out,
        theory_order=theory_order,
        title=title,
    )
    path = render(spec)
    click.echo(f"wrote {path}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except FigureKitError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
