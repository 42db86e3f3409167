# Tests package for crn-dot
