"""`python -m datagen` entry point: subcommands dispatched to the management commands."""
import os
import sys

from django.core.management.base import CommandError

from .exceptions import DatagenError, IoFailure, SceneUnsatisfiable, SpecError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SPEC = 2
EXIT_IO = 3
EXIT_UNSATISFIABLE = 4

SUBCOMMANDS = {
    'generate': 'generate',
    'validate-spec': 'validate_spec',
    'preview': 'preview',
    'bench': 'bench',
}

USAGE = (
    'usage: python -m datagen {generate,validate-spec,preview,bench} [options]\n'
    '  generate       --spec PATH --out DIR --num N [--seed S] [--workers W] [--min-pixels P]\n'
    '  validate-spec  --spec PATH\n'
    '  preview        --spec PATH --out DIR --index I [--seed S]\n'
    '  bench          [--workers W] [--num N]\n'
)


def exit_code_for(exc):
    if isinstance(exc, SpecError):
        return EXIT_SPEC
    if isinstance(exc, IoFailure):
        return EXIT_IO
    if isinstance(exc, SceneUnsatisfiable):
        return EXIT_UNSATISFIABLE
    return EXIT_USAGE


def command_error(exc):
    """Wrap a DatagenError (or OSError) into a CommandError carrying the exit code."""
    if isinstance(exc, OSError):
        return CommandError(str(exc), returncode=EXIT_IO)
    if isinstance(exc, DatagenError):
        return CommandError(str(exc), returncode=exit_code_for(exc))
    return CommandError(str(exc), returncode=EXIT_USAGE)


def cli_main(argv=None):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'synthgen.settings')
    import django
    from django.core.management import call_command

    django.setup()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ('-h', '--help'):
        sys.stderr.write(USAGE)
        return EXIT_OK if argv else EXIT_USAGE
    name = SUBCOMMANDS.get(argv[0])
    if name is None:
        sys.stderr.write('unknown subcommand: {}\n{}'.format(argv[0], USAGE))
        return EXIT_USAGE
    try:
        call_command(name, *argv[1:])
    except CommandError as exc:
        sys.stderr.write('error: {}\n'.format(exc))
        return exc.returncode
    except SystemExit as exc:
        # argparse の --help は SystemExit(0) で抜ける
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return EXIT_OK
