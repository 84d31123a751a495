#!/usr/bin/env python3

from sys import exit

from lib.cli.main import main

exit(main())
